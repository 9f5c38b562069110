#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "siamaug/common.hpp"
#include "siamaug/siamese.hpp"

namespace siamaug {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json mat_to_json(const nn::Mat& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.a}};
}

inline nn::Mat mat_from_json(const nlohmann::json& j) {
  nn::Mat m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.a = j.at("data").get<std::vector<double>>();
  if (m.a.size() != m.rows * m.cols) throw ParseError("tensor data does not match its shape");
  return m;
}

inline nlohmann::json mlp_to_json(const nn::Mlp2& m) {
  return {{"w1", mat_to_json(m.w1)},
          {"b1", m.b1},
          {"w2", mat_to_json(m.w2)},
          {"b2", m.b2},
          {"activation", m.act == nn::Activation::kTanh ? "tanh" : "identity"}};
}

inline nn::Mlp2 mlp_from_json(const nlohmann::json& j) {
  nn::Mlp2 m;
  m.w1 = mat_from_json(j.at("w1"));
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = mat_from_json(j.at("w2"));
  m.b2 = j.at("b2").get<std::vector<double>>();
  m.act = j.at("activation").get<std::string>() == "tanh" ? nn::Activation::kTanh
                                                          : nn::Activation::kIdentity;
  return m;
}

inline nlohmann::json encoder_config_to_json(const EncoderConfig& cfg) {
  return {{"vocab_size", cfg.vocab_size},
          {"embed_dim", cfg.embed_dim},
          {"hidden_dim", cfg.hidden_dim},
          {"max_len", cfg.max_len},
          {"variant", to_string(cfg.variant)}};
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig cfg;
  cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
  cfg.embed_dim = j.at("embed_dim").get<std::size_t>();
  cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  cfg.max_len = j.at("max_len").get<std::size_t>();
  cfg.variant = encoder_variant_from_string(j.at("variant").get<std::string>());
  return cfg;
}

inline nlohmann::json encoder_to_json(const EncoderParams& enc) {
  nlohmann::json j;
  j["variant"] = to_string(enc.variant);
  j["embed"] = mat_to_json(enc.embed);
  j["pos"] = mat_to_json(enc.pos);
  if (enc.variant == EncoderVariant::kAttentionBlock) {
    j["wq"] = mat_to_json(enc.wq);
    j["wk"] = mat_to_json(enc.wk);
    j["wv"] = mat_to_json(enc.wv);
  }
  j["mlp"] = mlp_to_json(enc.mlp);
  return j;
}

inline EncoderParams encoder_from_json(const nlohmann::json& j) {
  EncoderParams enc;
  enc.variant = encoder_variant_from_string(j.at("variant").get<std::string>());
  enc.embed = mat_from_json(j.at("embed"));
  enc.pos = mat_from_json(j.at("pos"));
  if (enc.variant == EncoderVariant::kAttentionBlock) {
    enc.wq = mat_from_json(j.at("wq"));
    enc.wk = mat_from_json(j.at("wk"));
    enc.wv = mat_from_json(j.at("wv"));
  }
  enc.mlp = mlp_from_json(j.at("mlp"));
  return enc;
}

}  // namespace detail

// Pretrained network, with shapes and row-major float arrays. `meta` is an
// arbitrary caller-provided object (fingerprints, seeds, vocabulary).
inline nlohmann::json network_to_json(const NetworkParams& params, const EncoderConfig& cfg,
                                      const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json j;
  j["format"] = "siamaug-model";
  j["version"] = kModelFormatVersion;
  j["encoder_config"] = detail::encoder_config_to_json(cfg);
  j["encoder"] = detail::encoder_to_json(params.enc);
  j["projector"] = detail::mlp_to_json(params.projector);
  j["has_predictor"] = params.has_predictor;
  if (params.has_predictor) j["predictor"] = detail::mlp_to_json(params.predictor);
  j["meta"] = meta;
  return j;
}

struct LoadedNetwork {
  NetworkParams params;
  EncoderConfig config;
  nlohmann::json meta;
};

inline LoadedNetwork network_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "siamaug-model") throw ParseError("not a siamaug model document");
  if (j.value("version", 0) != kModelFormatVersion) throw ParseError("unsupported model version");
  LoadedNetwork loaded;
  loaded.config = detail::encoder_config_from_json(j.at("encoder_config"));
  loaded.params.enc = detail::encoder_from_json(j.at("encoder"));
  loaded.params.projector = detail::mlp_from_json(j.at("projector"));
  loaded.params.has_predictor = j.at("has_predictor").get<bool>();
  if (loaded.params.has_predictor) {
    loaded.params.predictor = detail::mlp_from_json(j.at("predictor"));
  }
  loaded.meta = j.value("meta", nlohmann::json::object());
  return loaded;
}

// Fine-tuned classifier (encoder + softmax head).
inline nlohmann::json classifier_to_json(const ClassifierParams& params, const EncoderConfig& cfg,
                                         const nlohmann::json& meta = nlohmann::json::object()) {
  nlohmann::json j;
  j["format"] = "siamaug-classifier";
  j["version"] = kModelFormatVersion;
  j["encoder_config"] = detail::encoder_config_to_json(cfg);
  j["encoder"] = detail::encoder_to_json(params.enc);
  j["head_w"] = detail::mat_to_json(params.head_w);
  j["head_b"] = params.head_b;
  j["meta"] = meta;
  return j;
}

struct LoadedClassifier {
  ClassifierParams params;
  EncoderConfig config;
  nlohmann::json meta;
};

inline LoadedClassifier classifier_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "siamaug-classifier") {
    throw ParseError("not a siamaug classifier document");
  }
  if (j.value("version", 0) != kModelFormatVersion) throw ParseError("unsupported model version");
  LoadedClassifier loaded;
  loaded.config = detail::encoder_config_from_json(j.at("encoder_config"));
  loaded.params.enc = detail::encoder_from_json(j.at("encoder"));
  loaded.params.head_w = detail::mat_from_json(j.at("head_w"));
  loaded.params.head_b = j.at("head_b").get<std::vector<double>>();
  loaded.meta = j.value("meta", nlohmann::json::object());
  return loaded;
}

}  // namespace siamaug
