#include "wugdef/embeddings.hpp"

#include <cmath>
#include <thread>

#include "httplib.h"
#include "http_util.hpp"
#include "json.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "vector contains a non-finite value");
  }
}

namespace {

void check_dims(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimMismatch, "dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

double dot(const Vector& a, const Vector& b) {
  check_dims(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

double cosine(const Vector& a, const Vector& b) {
  check_dims(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector is undefined");
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

Vector centroid(std::span<const Vector> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::kEmptyInput, "centroid of an empty list");
  std::vector<double> sum(vectors.front().dim(), 0.0);
  for (const auto& v : vectors) {
    check_dims(vectors.front(), v);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  for (double& x : sum) x /= static_cast<double>(vectors.size());
  return Vector(std::move(sum));
}

Vector weighted_centroid(std::span<const Vector> vectors, std::span<const double> weights) {
  if (vectors.empty()) throw Error(ErrorCode::kEmptyInput, "centroid of an empty list");
  if (weights.size() != vectors.size()) throw Error(ErrorCode::kInvalidArgument, "one weight per vector required");
  std::vector<double> sum(vectors.front().dim(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    check_dims(vectors.front(), vectors[k]);
    if (!(weights[k] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "weights must be positive");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += weights[k] * vectors[k][i];
    total += weights[k];
  }
  for (double& x : sum) x /= total;
  return Vector(std::move(sum));
}

Vector normalized(const Vector& v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  return scaled(v, 1.0 / n);
}

Vector scaled(const Vector& v, double factor) {
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x *= factor;
  return Vector(std::move(out));
}

std::vector<Vector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw Error(ErrorCode::kEmptyText, "text #" + std::to_string(i) + " is empty");
  }
  if (texts.empty()) return {};
  auto out = embed_impl(texts);
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kProviderUnavailable, name() + " returned " + std::to_string(out.size()) +
                                                     " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : out) {
    if (v.dim() != out.front().dim() || v.dim() == 0) {
      throw Error(ErrorCode::kProviderUnavailable, name() + " returned vectors of inconsistent dimension");
    }
  }
  return out;
}

Vector EmbeddingProvider::embed(const std::string& text) const {
  return embed_batch(std::span<const std::string>(&text, 1)).front();
}

std::vector<Vector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts) {
  return provider.embed_batch(texts);
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
}

std::vector<Vector> HashingEmbedder::embed_impl(std::span<const std::string> texts) const {
  std::string seed_bytes(reinterpret_cast<const char*>(&seed_), sizeof(seed_));
  const std::uint64_t state = fnv1a64(seed_bytes);
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::string padded;
    padded.reserve(text.size() + 2);
    padded.push_back('\x02');
    padded.append(text);
    padded.push_back('\x03');
    std::vector<double> counts(dim_, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      counts[fnv1a64(std::string_view(padded).substr(i, 3), state) % dim_] += 1.0;
    }
    out.push_back(normalized(Vector(std::move(counts))));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options) : options_(std::move(options)) {
  detail::parse_endpoint(options_.url, ErrorCode::kProviderUnavailable);
  if (options_.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be positive");
}

std::vector<Vector> RemoteEmbedder::embed_impl(std::span<const std::string> texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
    auto batch = texts.subspan(start, std::min(options_.batch_size, texts.size() - start));
    auto vs = request_batch(batch);
    for (auto& v : vs) out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vector> RemoteEmbedder::request_batch(std::span<const std::string> texts) const {
  const auto ep = detail::parse_endpoint(options_.url, ErrorCode::kProviderUnavailable);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  const std::string body = nlohmann::json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    auto res = client.Post(ep.base_path + "/embed", body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderUnavailable, "embedding service returned HTTP " + std::to_string(res->status));
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& rows = j.at("vectors");
      const std::size_t dim = j.at("dim").get<std::size_t>();
      std::vector<Vector> out;
      for (const auto& row : rows) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != dim) throw Error(ErrorCode::kProviderUnavailable, "vector length != declared dim");
        out.emplace_back(std::move(values));
      }
      if (out.size() != texts.size()) {
        throw Error(ErrorCode::kProviderUnavailable, "embedding service returned the wrong number of vectors");
      }
      std::size_t expected = 0;
      if (!dim_.compare_exchange_strong(expected, dim) && expected != dim) {
        throw Error(ErrorCode::kProviderUnavailable, "embedding dimension changed from " + std::to_string(expected) +
                                                         " to " + std::to_string(dim));
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderUnavailable, std::string("malformed /embed response: ") + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument) {
        throw Error(ErrorCode::kProviderUnavailable, std::string("malformed /embed response: ") + e.what());
      }
      throw;
    }
  }
  throw Error(ErrorCode::kProviderUnavailable, "embedding service at " + options_.url + ": " + last_error);
}

}  // namespace wugdef
