#pragma once

// Model file format (JSON, format_version 1): layer list with type tag,
// dimensions, order/mode/input_map for adaptive layers, and one flat
// "params" array per layer holding the weight/coefficient tensor in
// row-major order followed by the bias. The fitted scaler rides along so
// a saved model can be applied to raw feature rows. Doubles round-trip
// bit-faithfully (shortest-representation printing on save, exact parse
// on load).

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cheby/data.hpp"
#include "cheby/network.hpp"

namespace cheby {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    Network net;
    std::optional<Scaler> scaler;
};

inline nlohmann::json model_to_json(const Network& net, const Scaler* scaler) {
    nlohmann::json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["layers"] = nlohmann::json::array();
    for (const auto& l : net.layers) {
        nlohmann::json jl;
        if (const auto* d = std::get_if<DenseLayer>(&l)) {
            jl["type"] = "dense";
            jl["in"] = d->in;
            jl["out"] = d->out;
            std::vector<double> params = d->W;
            params.insert(params.end(), d->b.begin(), d->b.end());
            jl["params"] = params;
        } else {
            const auto& c = std::get<ChebyAdaptiveLayer>(l);
            jl["type"] = "cheby";
            jl["in"] = c.in;
            jl["out"] = c.out;
            jl["k"] = c.k;
            jl["mode"] = to_string(c.mode);
            jl["input_map"] = to_string(c.input_map);
            std::vector<double> params = c.C;
            params.insert(params.end(), c.b.begin(), c.b.end());
            jl["params"] = params;
        }
        doc["layers"].push_back(std::move(jl));
    }
    if (scaler) {
        doc["scaler"] = {{"lo", scaler->lo}, {"hi", scaler->hi}};
    } else {
        doc["scaler"] = nullptr;
    }
    return doc;
}

inline void save_model(const std::string& path, const Network& net, const Scaler* scaler = nullptr) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_model: cannot open " + path);
    f << model_to_json(net, scaler).dump(2) << "\n";
    if (!f) throw std::runtime_error("save_model: write to " + path + " failed");
}

inline ModelFile model_from_json(const nlohmann::json& doc) {
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kModelFormatVersion)
        throw std::runtime_error("model file: unsupported format version");
    ModelFile mf;
    for (const auto& jl : doc.at("layers")) {
        const std::string type = jl.at("type").get<std::string>();
        const auto in = jl.at("in").get<std::size_t>();
        const auto out = jl.at("out").get<std::size_t>();
        const auto params = jl.at("params").get<std::vector<double>>();
        if (type == "dense") {
            DenseLayer d(in, out);
            if (params.size() != d.W.size() + d.b.size())
                throw std::runtime_error("model file: dense layer parameter count mismatch");
            std::copy(params.begin(), params.begin() + static_cast<long>(d.W.size()), d.W.begin());
            std::copy(params.begin() + static_cast<long>(d.W.size()), params.end(), d.b.begin());
            mf.net.add(std::move(d));
        } else if (type == "cheby") {
            ChebyAdaptiveLayer c(in, out, jl.at("k").get<std::size_t>(),
                                 cheby_mode_from_string(jl.at("mode").get<std::string>()),
                                 input_map_from_string(jl.at("input_map").get<std::string>()));
            if (params.size() != c.C.size() + c.b.size())
                throw std::runtime_error("model file: adaptive layer parameter count mismatch");
            std::copy(params.begin(), params.begin() + static_cast<long>(c.C.size()), c.C.begin());
            std::copy(params.begin() + static_cast<long>(c.C.size()), params.end(), c.b.begin());
            mf.net.add(std::move(c));
        } else {
            throw std::runtime_error("model file: unknown layer type \"" + type + "\"");
        }
    }
    if (doc.contains("scaler") && !doc["scaler"].is_null()) {
        Scaler s;
        s.lo = doc["scaler"].at("lo").get<std::vector<double>>();
        s.hi = doc["scaler"].at("hi").get<std::vector<double>>();
        if (s.lo.size() != s.hi.size()) throw std::runtime_error("model file: scaler shape mismatch");
        mf.scaler = std::move(s);
    }
    return mf;
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_model: cannot open " + path);
    nlohmann::json doc;
    try {
        f >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_model: " + path + " is not valid JSON: " + e.what());
    }
    return model_from_json(doc);
}

} // namespace cheby
