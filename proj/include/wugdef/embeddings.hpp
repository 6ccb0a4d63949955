#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wugdef {

// Dense embedding. Values are always finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> values_;
};

// All of these throw Error{DimMismatch} when dimensions differ.
double dot(const Vector& a, const Vector& b);
// Throws Error{ZeroVector} if either argument has zero norm.
double cosine(const Vector& a, const Vector& b);
// Element-wise mean. Throws Error{EmptyInput} for an empty list.
Vector centroid(std::span<const Vector> vectors);
// Weighted element-wise mean; weights must be positive.
Vector weighted_centroid(std::span<const Vector> vectors, std::span<const double> weights);

double l2_norm(const Vector& v);
Vector normalized(const Vector& v);
Vector scaled(const Vector& v, double factor);

// Text -> vector encoder. embed_batch validates inputs and outputs; concrete
// providers implement embed_impl.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // One vector per text, in input order. Throws Error{EmptyText} for an empty
  // string and Error{ProviderUnavailable} when the backend fails.
  std::vector<Vector> embed_batch(std::span<const std::string> texts) const;
  Vector embed(const std::string& text) const;

  virtual std::string name() const = 0;

 protected:
  virtual std::vector<Vector> embed_impl(std::span<const std::string> texts) const = 0;
};

// Free-function form of EmbeddingProvider::embed_batch.
std::vector<Vector> embed_batch(const EmbeddingProvider& provider, std::span<const std::string> texts);

// Deterministic local encoder: hashed byte 3-gram counts (the text padded
// with start/end markers) folded into `dim` buckets, then L2-normalized.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDim = 256;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed5eed2024ULL;

  explicit HashingEmbedder(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

  std::size_t dim() const { return dim_; }
  std::string name() const override { return "hashing-3gram"; }

 protected:
  std::vector<Vector> embed_impl(std::span<const std::string> texts) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

struct RemoteEmbedderOptions {
  std::string url;  // e.g. http://localhost:8080 or http://host:port/prefix
  std::size_t batch_size = 32;
  int max_retries = 2;
  int timeout_seconds = 60;
};

// Client for POST /embed {"texts": [...]} -> {"vectors": [[...]], "dim": n}.
// Retries are per batch request. Every vector in the session must share one
// dimension; a change is reported as ProviderUnavailable.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderOptions options);

  std::string name() const override { return "remote:" + options_.url; }
  // 0 until the first response has been received.
  std::size_t dim() const { return dim_.load(); }

 protected:
  std::vector<Vector> embed_impl(std::span<const std::string> texts) const override;

 private:
  std::vector<Vector> request_batch(std::span<const std::string> texts) const;

  RemoteEmbedderOptions options_;
  mutable std::atomic<std::size_t> dim_{0};
};

}  // namespace wugdef
