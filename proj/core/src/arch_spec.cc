// Copyright 2026 The EvoPose Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evopose/arch_spec.h"

#include <cstdio>
#include <sstream>

#include "evopose/conv.h"
#include "evopose/error.h"
#include "evopose/layers.h"

namespace evopose {
namespace {

int64_t StridedSize(int64_t n, int stride) { return SameOutputSize(n, stride, ConvKind::kStandard); }

void AddConv(std::vector<ParamSpec>& out, const std::string& name, int k, int in, int o,
             ParamRole role) {
  Shape shape = role == ParamRole::kDepthwiseKernel ? Shape{k, k, in, 1} : Shape{k, k, in, o};
  const int64_t fan_in = role == ParamRole::kDepthwiseKernel ? int64_t{k} * k : int64_t{k} * k * in;
  out.push_back({name + "/kernel", std::move(shape), role, true, fan_in});
}

void AddBn(std::vector<ParamSpec>& out, const std::string& name, int c) {
  out.push_back({name + "/gamma", {c}, ParamRole::kBnGamma, true, 1});
  out.push_back({name + "/beta", {c}, ParamRole::kBnBeta, true, 1});
  out.push_back({name + "/moving_mean", {c}, ParamRole::kBnMovingMean, false, 1});
  out.push_back({name + "/moving_var", {c}, ParamRole::kBnMovingVar, false, 1});
}

void AddDense(std::vector<ParamSpec>& out, const std::string& name, int in, int o) {
  out.push_back({name + "/kernel", {in, o}, ParamRole::kDenseKernel, true, in});
  out.push_back({name + "/bias", {o}, ParamRole::kBias, true, in});
}

}  // namespace

std::string BlockSpec::Prefix() const {
  return "m" + std::to_string(module + 1) + "/b" + std::to_string(index + 1);
}

int64_t ArchSpec::backbone_h() const {
  return blocks.empty() || blocks.back().empty() ? stem.out_h : blocks.back().back().out_h;
}
int64_t ArchSpec::backbone_w() const {
  return blocks.empty() || blocks.back().empty() ? stem.out_w : blocks.back().back().out_w;
}
int ArchSpec::backbone_channels() const {
  return blocks.empty() || blocks.back().empty() ? stem.out_channels
                                                 : blocks.back().back().out_channels;
}

int ArchSpec::BackboneStride() const {
  int s = stem.stride;
  for (const auto& m : modules) s *= m.stride;
  return s;
}

ArchSpec DecodeModules(const std::vector<ModuleConfig>& modules, int64_t input_h,
                       int64_t input_w, int keypoints, const BuildOptions& o) {
  if (input_h < 1 || input_w < 1) throw InvalidArgument("input dims must be >= 1");
  if (keypoints < 1) throw InvalidArgument("keypoints must be >= 1");
  if (o.channel_unit < 1 || o.stem_channels < 1 || o.head_channels < 1 ||
      o.expand_ratio < 1 || o.head_layers < 0) {
    throw InvalidArgument("build options must be positive");
  }
  ArchSpec spec;
  spec.input_h = input_h;
  spec.input_w = input_w;
  spec.keypoints = keypoints;
  spec.options = o;
  spec.modules = modules;

  spec.stem = {"stem", 3, 2, 3, o.stem_channels, StridedSize(input_h, 2), StridedSize(input_w, 2)};
  int64_t h = spec.stem.out_h, w = spec.stem.out_w;
  int channels = o.stem_channels;
  for (size_t m = 0; m < modules.size(); ++m) {
    const ModuleConfig& mc = modules[m];
    if (mc.blocks < 1 || mc.kernel < 1 || mc.kernel % 2 == 0 || mc.channels < 1 ||
        mc.stride < 1) {
      throw InvalidArgument("module " + std::to_string(m + 1) + " has an invalid configuration");
    }
    std::vector<BlockSpec> row;
    for (int b = 0; b < mc.blocks; ++b) {
      BlockSpec bs;
      bs.module = static_cast<int>(m);
      bs.index = b;
      bs.in_channels = channels;
      // The first module keeps EfficientNet-B0's expansion ratio of one.
      const int ratio = m == 0 ? 1 : o.expand_ratio;
      bs.has_expand = ratio != 1;
      bs.expanded_channels = channels * ratio;
      bs.out_channels = mc.channels;
      bs.se_channels = static_cast<int>(SqueezeExciteChannels(channels, o.se_ratio));
      bs.kernel = mc.kernel;
      bs.stride = b == 0 ? mc.stride : 1;
      bs.in_h = h;
      bs.in_w = w;
      bs.out_h = StridedSize(h, bs.stride);
      bs.out_w = StridedSize(w, bs.stride);
      bs.skip = bs.stride == 1 && bs.in_channels == bs.out_channels;
      h = bs.out_h;
      w = bs.out_w;
      channels = bs.out_channels;
      row.push_back(bs);
    }
    spec.blocks.push_back(std::move(row));
  }
  for (int i = 0; i < o.head_layers; ++i) {
    ConvLayerSpec l{"head" + std::to_string(i + 1), o.head_kernel, 2, channels,
                    o.head_channels, h * 2, w * 2};
    h = l.out_h;
    w = l.out_w;
    channels = l.out_channels;
    spec.head.push_back(l);
  }
  spec.final_conv = {"final", 1, 1, channels, keypoints, h, w};
  return spec;
}

ArchSpec BuildArchSpec(const Genotype& g, int64_t input_h, int64_t input_w, int keypoints,
                       const BuildOptions& options, const Genotype& ancestor) {
  const auto violations = Validate(g, ancestor);
  if (!violations.empty()) {
    std::string msg = "invalid genotype " + CanonicalEncode(g) + ":";
    for (const auto& v : violations) {
      msg += " [row " + std::to_string(v.row) + ", col " + std::to_string(v.col) + "] " +
             v.message + ";";
    }
    throw InvalidArgument(msg);
  }
  std::vector<ModuleConfig> modules;
  for (int i = 0; i < kNumModules; ++i) {
    modules.push_back({g.blocks(i), g.kernel(i), g.channels8(i) * options.channel_unit,
                       g.stride(i)});
  }
  return DecodeModules(modules, input_h, input_w, keypoints, options);
}

std::vector<TableRow> ArchSpec::DecodeTable() const {
  std::vector<TableRow> rows;
  rows.push_back({"Stem Conv", 0, stem.kernel, stem.stride, stem.out_h, stem.out_w,
                  stem.out_channels});
  for (size_t m = 0; m < blocks.size(); ++m) {
    const auto& last = blocks[m].back();
    rows.push_back({"Module " + std::to_string(m + 1), modules[m].blocks, modules[m].kernel,
                    modules[m].stride, last.out_h, last.out_w, last.out_channels});
  }
  for (size_t i = 0; i < head.size(); ++i) {
    rows.push_back({"Head Conv " + std::to_string(i + 1), 0, head[i].kernel, head[i].stride,
                    head[i].out_h, head[i].out_w, head[i].out_channels});
  }
  rows.push_back({"Final Conv", 0, final_conv.kernel, final_conv.stride, final_conv.out_h,
                  final_conv.out_w, final_conv.out_channels});
  return rows;
}

std::vector<ParamSpec> ArchSpec::Parameters() const {
  std::vector<ParamSpec> out;
  AddConv(out, "stem/conv", stem.kernel, stem.in_channels, stem.out_channels,
          ParamRole::kConvKernel);
  AddBn(out, "stem/bn", stem.out_channels);
  for (const auto& module : blocks) {
    for (const auto& b : module) {
      const std::string p = b.Prefix();
      if (b.has_expand) {
        AddConv(out, p + "/expand", 1, b.in_channels, b.expanded_channels,
                ParamRole::kConvKernel);
        AddBn(out, p + "/expand_bn", b.expanded_channels);
      }
      AddConv(out, p + "/dw", b.kernel, b.expanded_channels, 1, ParamRole::kDepthwiseKernel);
      AddBn(out, p + "/dw_bn", b.expanded_channels);
      AddDense(out, p + "/se_reduce", b.expanded_channels, b.se_channels);
      AddDense(out, p + "/se_expand", b.se_channels, b.expanded_channels);
      AddConv(out, p + "/project", 1, b.expanded_channels, b.out_channels,
              ParamRole::kConvKernel);
      AddBn(out, p + "/project_bn", b.out_channels);
    }
  }
  for (const auto& l : head) {
    AddConv(out, l.name + "/conv", l.kernel, l.in_channels, l.out_channels,
            ParamRole::kTransposeKernel);
    AddBn(out, l.name + "/bn", l.out_channels);
  }
  AddConv(out, "final", 1, final_conv.in_channels, final_conv.out_channels,
          ParamRole::kConvKernel);
  out.push_back({"final/bias", {final_conv.out_channels}, ParamRole::kBias, true,
                 final_conv.in_channels});
  return out;
}

NetworkCost CountParamsFlops(const ArchSpec& s) {
  NetworkCost c;
  for (const auto& p : s.Parameters()) {
    const int64_t n = NumElements(p.shape);
    c.params_with_bn_stats += n;
    if (p.trainable) c.params += n;
  }
  auto conv = [](int64_t out_h, int64_t out_w, int64_t k, int64_t in, int64_t o) {
    return out_h * out_w * k * k * in * o;
  };
  c.macs += conv(s.stem.out_h, s.stem.out_w, s.stem.kernel, s.stem.in_channels,
                 s.stem.out_channels);
  for (const auto& module : s.blocks) {
    for (const auto& b : module) {
      if (b.has_expand) c.macs += conv(b.in_h, b.in_w, 1, b.in_channels, b.expanded_channels);
      c.macs += conv(b.out_h, b.out_w, b.kernel, b.expanded_channels, 1);
      c.macs += 2 * int64_t{b.expanded_channels} * b.se_channels;
      c.macs += conv(b.out_h, b.out_w, 1, b.expanded_channels, b.out_channels);
    }
  }
  int64_t h = s.backbone_h(), w = s.backbone_w();
  for (const auto& l : s.head) {
    // Transpose conv: every input pixel scatters the full kernel.
    c.macs += conv(h, w, l.kernel, l.in_channels, l.out_channels);
    h = l.out_h;
    w = l.out_w;
  }
  c.macs += conv(s.final_conv.out_h, s.final_conv.out_w, 1, s.final_conv.in_channels,
                 s.final_conv.out_channels);
  c.flops = 2 * c.macs;
  return c;
}

std::string ArchSpec::ToText() const {
  std::ostringstream os;
  auto shape = [](int64_t h, int64_t w, int64_t c) {
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
  };
  os << "# evopose arch v1\n";
  os << "input " << shape(input_h, input_w, 3) << " keypoints " << keypoints << "\n";
  os << "stem/conv conv k" << stem.kernel << " s" << stem.stride << " " << stem.in_channels
     << "->" << stem.out_channels << " out " << shape(stem.out_h, stem.out_w, stem.out_channels)
     << "\n";
  for (const auto& module : blocks) {
    for (const auto& b : module) {
      const std::string p = b.Prefix();
      if (b.has_expand) {
        os << p << "/expand conv k1 s1 " << b.in_channels << "->" << b.expanded_channels
           << " out " << shape(b.in_h, b.in_w, b.expanded_channels) << "\n";
      }
      os << p << "/dw depthwise k" << b.kernel << " s" << b.stride << " "
         << b.expanded_channels << "->" << b.expanded_channels << " out "
         << shape(b.out_h, b.out_w, b.expanded_channels) << "\n";
      os << p << "/se dense " << b.expanded_channels << "->" << b.se_channels << "->"
         << b.expanded_channels << "\n";
      os << p << "/project conv k1 s1 " << b.expanded_channels << "->" << b.out_channels
         << " out " << shape(b.out_h, b.out_w, b.out_channels)
         << (b.skip ? " skip" : "") << "\n";
    }
  }
  for (const auto& l : head) {
    os << l.name << "/conv transpose k" << l.kernel << " s" << l.stride << " "
       << l.in_channels << "->" << l.out_channels << " out "
       << shape(l.out_h, l.out_w, l.out_channels) << "\n";
  }
  os << "final conv k1 s1 " << final_conv.in_channels << "->" << final_conv.out_channels
     << " out " << shape(final_conv.out_h, final_conv.out_w, final_conv.out_channels) << "\n";
  return os.str();
}

std::string FormatDecodeTable(const ArchSpec& spec) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %6s %6s %6s  %s\n", "Component", "Blocks", "Kernel",
                "Stride", "Output Shape");
  os << line;
  for (const auto& r : spec.DecodeTable()) {
    const std::string blocks = r.blocks ? std::to_string(r.blocks) : "-";
    const std::string out = "(" + std::to_string(r.out_h) + ", " + std::to_string(r.out_w) +
                            ", " + std::to_string(r.out_c) + ")";
    std::snprintf(line, sizeof(line), "%-12s %6s %6d %6d  %s\n", r.component.c_str(),
                  blocks.c_str(), r.kernel, r.stride, out.c_str());
    os << line;
  }
  const NetworkCost c = CountParamsFlops(spec);
  os << "params " << c.params << " (with BN moving stats " << c.params_with_bn_stats
     << "), multiply-adds " << c.macs << ", FLOPs " << c.flops << "\n";
  return os.str();
}

}  // namespace evopose
