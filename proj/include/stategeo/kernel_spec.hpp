#pragma once

#include <string>
#include <variant>

namespace stategeo {

/// k(x,y) = exp(-|x-y|^2 / (2 sigma^2))
struct TranslationKernel {
  double sigma = 1.0;
  bool operator==(const TranslationKernel&) const = default;
};

/// k(x,y) = exp(-alpha |x|^2) exp(-beta |x-y|^2) exp(-alpha |y|^2)
struct ConfinedKernel {
  double alpha = 0.1;
  double beta = 1.0;
  bool operator==(const ConfinedKernel&) const = default;
};

class KernelSpec {
 public:
  using Variant = std::variant<TranslationKernel, ConfinedKernel>;

  KernelSpec() = default;
  [[nodiscard]] static KernelSpec translation(double sigma = 1.0);
  [[nodiscard]] static KernelSpec confined(double alpha, double beta = 1.0);

  [[nodiscard]] const Variant& get() const { return kernel_; }
  [[nodiscard]] bool is_translation() const { return std::holds_alternative<TranslationKernel>(kernel_); }
  [[nodiscard]] bool is_confined() const { return std::holds_alternative<ConfinedKernel>(kernel_); }
  [[nodiscard]] const TranslationKernel& as_translation() const { return std::get<TranslationKernel>(kernel_); }
  [[nodiscard]] const ConfinedKernel& as_confined() const { return std::get<ConfinedKernel>(kernel_); }

  /// Length over which the kernel (or its confinement) decays appreciably.
  [[nodiscard]] double length_scale() const;

  /// "translation:1" / "confined:0.1,1"; parse() accepts the same grammar.
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] static KernelSpec parse(const std::string& text);

  bool operator==(const KernelSpec&) const = default;

 private:
  explicit KernelSpec(Variant v) : kernel_(v) {}
  Variant kernel_{TranslationKernel{}};
};

}  // namespace stategeo
