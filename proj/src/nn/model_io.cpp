#include <sodium.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "seco/common/error.hpp"
#include "seco/nn/model.hpp"

namespace seco::nn {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "seco-model";
constexpr int kVersion = 1;

std::string encode_ints(const std::vector<int64_t>& v) {
    const size_t bytes = v.size() * 8;
    std::vector<uint8_t> raw(bytes);
    for (size_t i = 0; i < v.size(); ++i)
        for (int k = 0; k < 8; ++k) raw[8 * i + k] = static_cast<uint8_t>(static_cast<uint64_t>(v[i]) >> (8 * k));
    std::string out(sodium_base64_ENCODED_LEN(bytes, sodium_base64_VARIANT_ORIGINAL), '\0');
    sodium_bin2base64(out.data(), out.size(), raw.data(), raw.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(out.size() - 1);  // trailing NUL
    return out;
}

std::vector<int64_t> decode_ints(const std::string& b64, const std::string& what) {
    std::vector<uint8_t> raw(b64.size() / 4 * 3 + 3);
    size_t len = 0;
    if (sodium_base642bin(raw.data(), raw.size(), b64.data(), b64.size(), nullptr, &len, nullptr,
                          sodium_base64_VARIANT_ORIGINAL) != 0)
        throw ConfigError(what + ": invalid base64");
    if (len % 8 != 0) throw ConfigError(what + ": blob is not a whole number of int64 values");
    std::vector<int64_t> v(len / 8);
    for (size_t i = 0; i < v.size(); ++i) {
        uint64_t u = 0;
        for (int k = 0; k < 8; ++k) u |= uint64_t(raw[8 * i + k]) << (8 * k);
        v[i] = static_cast<int64_t>(u);
    }
    return v;
}

json shape_json(const Shape& s, LayerKind k) {
    if (k == LayerKind::FullyConnected || k == LayerKind::ReLU) return s.size();
    return json::array({s.h, s.w, s.c});
}

Shape shape_from(const json& j, const std::string& what) {
    if (j.is_number_unsigned()) return Shape{1, 1, j.get<uint32_t>()};
    if (j.is_array() && j.size() == 3) return Shape{j[0].get<uint32_t>(), j[1].get<uint32_t>(), j[2].get<uint32_t>()};
    throw ConfigError(what + ": shape must be a size or [h, w, c]");
}

LayerKind kind_from(const std::string& s) {
    for (LayerKind k : {LayerKind::FullyConnected, LayerKind::Conv, LayerKind::AvgPool, LayerKind::ReLU})
        if (s == layer_kind_name(k)) return k;
    throw ConfigError("unknown layer kind '" + s + "'");
}

}  // namespace

std::string model_to_json(const Model& m) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["name"] = m.name;
    j["scale"] = m.scale;
    j["layers"] = json::array();
    for (const auto& l : m.layers) {
        json e;
        e["kind"] = layer_kind_name(l.kind);
        e["in"] = shape_json(l.in, l.kind);
        e["out"] = shape_json(l.out, l.kind);
        if (l.kind == LayerKind::Conv || l.kind == LayerKind::AvgPool) {
            e["kernel"] = l.kernel;
            e["stride"] = l.stride;
        }
        if (!l.weights.empty()) e["weights"] = encode_ints(l.weights);
        if (!l.bias.empty()) e["bias"] = encode_ints(l.bias);
        j["layers"].push_back(std::move(e));
    }
    return j.dump(1);
}

Model model_from_json(const std::string& text) {
    Model m;
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != kFormat) throw ConfigError("not a model file (format field)");
        if (j.value("version", 0) != kVersion) throw ConfigError("unsupported model file version");
        m.name = j.value("name", "");
        m.scale = j.at("scale").get<uint32_t>();
        size_t i = 0;
        for (const auto& e : j.at("layers")) {
            const std::string what = "layer " + std::to_string(++i);
            LayerSpec l;
            l.kind = kind_from(e.at("kind").get<std::string>());
            l.in = shape_from(e.at("in"), what);
            l.out = shape_from(e.at("out"), what);
            l.kernel = e.value("kernel", 0u);
            l.stride = e.value("stride", 1u);
            if (e.contains("weights")) l.weights = decode_ints(e["weights"].get<std::string>(), what + " weights");
            if (e.contains("bias")) l.bias = decode_ints(e["bias"].get<std::string>(), what + " bias");
            m.layers.push_back(std::move(l));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model parse error: ") + e.what());
    }
    m.finalize();
    return m;
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write model file " + path);
    out << model_to_json(m) << '\n';
    if (!out) throw ConfigError("failed writing model file " + path);
}

}  // namespace seco::nn
