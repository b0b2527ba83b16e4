#include "csiloc/nn/checkpoint.hpp"

#include <algorithm>
#include <string>
#include <variant>

#include "../io_util.hpp"
#include "csiloc/error.hpp"

namespace csiloc::nn {
namespace {

enum Tag : std::uint8_t { kConv = 0, kDense = 1, kLeaky = 2, kSoftmax = 3, kDropout = 4, kFlatten = 5 };

void need(const detail::Reader& in, std::size_t n, const char* what) {
  if (!in.has(n)) throw TruncationError(std::string("checkpoint truncated in ") + what, in.offset() + n,
                                        in.offset() + in.remaining());
}

void put_params(std::vector<std::uint8_t>& out, Layer& layer) {
  std::uint64_t n = 0;
  for (Parameter* p : layer.parameters()) n += p->value.size();
  detail::put(out, n);
  for (Parameter* p : layer.parameters())
    for (double v : p->value.values()) detail::put(out, v);
}

void get_params(detail::Reader& in, Layer& layer) {
  need(in, 8, "parameter count");
  const auto n = in.get<std::uint64_t>();
  std::uint64_t expected = 0;
  for (Parameter* p : layer.parameters()) expected += p->value.size();
  if (n != expected)
    throw FormatError("checkpoint layer stores " + std::to_string(n) + " parameters, spec needs " +
                      std::to_string(expected));
  for (Parameter* p : layer.parameters())
    for (double& v : p->value.values()) v = in.get<double>();
}

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(Network& network) {
  const NetworkSpec& spec = network.spec();
  const std::vector<Shape> chain = spec.shape_chain();
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  detail::put(out, static_cast<std::uint8_t>(spec.task));
  detail::put(out, static_cast<std::uint8_t>(spec.input_shape.size()));
  for (std::size_t d : spec.input_shape) detail::put(out, u32(d));
  detail::put(out, u32(spec.layers.size()));

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& ls = spec.layers[i];
    if (const auto* c = std::get_if<ConvSpec>(&ls)) {
      detail::put(out, std::uint8_t{kConv});
      for (std::size_t v : {c->filters, c->filter_h, c->filter_w, c->stride_h, c->stride_w, chain[i][2]})
        detail::put(out, u32(v));
      put_params(out, network.layer(i));
    } else if (const auto* f = std::get_if<FullyConnectedSpec>(&ls)) {
      detail::put(out, std::uint8_t{kDense});
      detail::put(out, u32(f->units));
      detail::put(out, u32(chain[i][0]));
      put_params(out, network.layer(i));
    } else if (const auto* l = std::get_if<LeakyReluSpec>(&ls)) {
      detail::put(out, std::uint8_t{kLeaky});
      detail::put(out, l->gamma);
    } else if (std::holds_alternative<SoftmaxSpec>(ls)) {
      detail::put(out, std::uint8_t{kSoftmax});
    } else if (const auto* d = std::get_if<DropoutSpec>(&ls)) {
      detail::put(out, std::uint8_t{kDropout});
      detail::put(out, d->p);
    } else {
      detail::put(out, std::uint8_t{kFlatten});
    }
  }
  return out;
}

Network decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) ||
      !std::equal(std::begin(kCheckpointMagic), std::end(kCheckpointMagic), bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; }))
    throw FormatError("bad magic: not a CSINET1 checkpoint");
  detail::Reader in(bytes.subspan(sizeof(kCheckpointMagic)));

  NetworkSpec spec;
  need(in, 2, "header");
  const auto task = in.get<std::uint8_t>();
  if (task > 1) throw FormatError("unknown task code " + std::to_string(task));
  spec.task = static_cast<Task>(task);
  const auto rank = in.get<std::uint8_t>();
  need(in, 4u * rank + 4, "header");
  spec.input_shape.clear();
  for (int d = 0; d < rank; ++d) spec.input_shape.push_back(in.get<std::uint32_t>());
  const auto layers = in.get<std::uint32_t>();

  // First pass reads specs; parameters are loaded once the network exists.
  struct Pending {
    std::size_t layer;
    std::size_t offset;
  };
  std::vector<Pending> pending;
  for (std::uint32_t i = 0; i < layers; ++i) {
    need(in, 1, "layer tag");
    const auto tag = in.get<std::uint8_t>();
    switch (tag) {
      case kConv: {
        need(in, 24, "conv spec");
        ConvSpec c;
        c.filters = in.get<std::uint32_t>();
        c.filter_h = in.get<std::uint32_t>();
        c.filter_w = in.get<std::uint32_t>();
        c.stride_h = in.get<std::uint32_t>();
        c.stride_w = in.get<std::uint32_t>();
        in.get<std::uint32_t>();  // in_channels, re-derived from the shape chain
        spec.layers.emplace_back(c);
        pending.push_back({i, in.offset()});
        need(in, 8, "parameter count");
        const auto n = in.get<std::uint64_t>();
        if (n > in.remaining() / 8) throw TruncationError("checkpoint truncated in parameters", n * 8, in.remaining());
        in.take(n * 8);
        break;
      }
      case kDense: {
        need(in, 8, "dense spec");
        FullyConnectedSpec f;
        f.units = in.get<std::uint32_t>();
        in.get<std::uint32_t>();
        spec.layers.emplace_back(f);
        pending.push_back({i, in.offset()});
        need(in, 8, "parameter count");
        const auto n = in.get<std::uint64_t>();
        if (n > in.remaining() / 8) throw TruncationError("checkpoint truncated in parameters", n * 8, in.remaining());
        in.take(n * 8);
        break;
      }
      case kLeaky:
        need(in, 8, "leaky ReLU spec");
        spec.layers.emplace_back(LeakyReluSpec{in.get<double>()});
        break;
      case kSoftmax:
        spec.layers.emplace_back(SoftmaxSpec{});
        break;
      case kDropout:
        need(in, 8, "dropout spec");
        spec.layers.emplace_back(DropoutSpec{in.get<double>()});
        break;
      case kFlatten:
        spec.layers.emplace_back(FlattenSpec{});
        break;
      default:
        throw FormatError("unknown layer tag " + std::to_string(tag));
    }
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after checkpoint");

  Network net(std::move(spec));
  for (const Pending& p : pending) {
    detail::Reader params(bytes.subspan(sizeof(kCheckpointMagic) + p.offset));
    get_params(params, net.layer(p.layer));
  }
  return net;
}

void save_checkpoint(Network& network, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(network));
}

Network load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(detail::read_file(path)); }

}  // namespace csiloc::nn
