#include "slabdens/basis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "slabdens/errors.hpp"

namespace slabdens {

namespace {

std::atomic<std::uint64_t> next_family_id{1};

double indicator_eval(const IndicatorAtom& a, double x) {
  if (x < a.lo) return 0.0;
  if (x < a.hi) return 1.0;
  return (a.closed_right && x == a.hi) ? 1.0 : 0.0;
}

double haar_eval(const HaarAtom& a, double x) {
  if (a.level < 0) return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  const double scale = std::ldexp(1.0, a.level);  // 2^j
  const double u = scale * x - a.shift;
  if (u < 0.0 || u > 1.0) return 0.0;
  if (u < 0.5) return 1.0;
  if (u < 1.0) return -1.0;
  // right edge: closed only for the last shift of the level
  return (a.shift == static_cast<int>(scale) - 1) ? -1.0 : 0.0;
}

double trig_eval(const TrigAtom& a, double x) {
  if (a.index == 0) return 1.0;
  const int r = (a.index + 1) / 2;
  const double arg = 2.0 * std::numbers::pi * r * x;
  const double root2 = std::numbers::sqrt2;
  return (a.index % 2 == 1) ? root2 * std::cos(arg) : root2 * std::sin(arg);
}

}  // namespace

double atom_eval(const BasisAtom& atom, double x) {
  return std::visit(
      [x](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IndicatorAtom>) {
          return indicator_eval(a, x);
        } else if constexpr (std::is_same_v<T, HaarAtom>) {
          return haar_eval(a, x);
        } else if constexpr (std::is_same_v<T, TrigAtom>) {
          return trig_eval(a, x);
        } else {
          return std::exp(-a.gamma * (a.center - x) * (a.center - x));
        }
      },
      atom);
}

double atom_norm_sq(const BasisAtom& atom) {
  return std::visit(
      [](const auto& a) -> double {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IndicatorAtom>) {
          return a.hi - a.lo;
        } else if constexpr (std::is_same_v<T, HaarAtom>) {
          return a.level < 0 ? 1.0 : std::ldexp(1.0, -a.level);
        } else if constexpr (std::is_same_v<T, TrigAtom>) {
          return 1.0;
        } else {
          return std::sqrt(std::numbers::pi / (2.0 * a.gamma));
        }
      },
      atom);
}

BasisFamily::BasisFamily(std::vector<BasisAtom> atoms, InnerProductRule rule, Interval support,
                         nlohmann::json descriptor, std::vector<int> anchors)
    : atoms_(std::move(atoms)),
      rule_(rule),
      support_(support),
      descriptor_(std::move(descriptor)),
      anchors_(std::move(anchors)),
      id_(next_family_id.fetch_add(1)) {
  norms_.reserve(atoms_.size());
  for (const auto& a : atoms_) {
    const double d = atom_norm_sq(a);
    if (!std::isfinite(d) || d <= 0.0) {
      throw FamilyNotSquareIntegrable("family entry has non-finite or zero squared norm");
    }
    norms_.push_back(d);
  }
}

std::string BasisFamily::label(int k) const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IndicatorAtom>) {
          os << "cell[" << a.lo << "," << a.hi << (a.closed_right ? "]" : ")");
        } else if constexpr (std::is_same_v<T, HaarAtom>) {
          if (a.level < 0) {
            os << "phi";
          } else {
            os << "psi(" << a.level << "," << a.shift << ")";
          }
        } else if constexpr (std::is_same_v<T, TrigAtom>) {
          if (a.index == 0) {
            os << "1";
          } else {
            os << ((a.index % 2 == 1) ? "cos" : "sin") << "(2pi*" << (a.index + 1) / 2 << "x)";
          }
        } else {
          os << "K(" << a.center << ",g=" << a.gamma << ")";
        }
      },
      atoms_[static_cast<std::size_t>(k)]);
  return os.str();
}

std::vector<double> BasisFamily::breakpoints(int k) const {
  return std::visit(
      [](const auto& a) -> std::vector<double> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IndicatorAtom>) {
          return {a.lo, a.hi};
        } else if constexpr (std::is_same_v<T, HaarAtom>) {
          if (a.level < 0) return {0.0, 1.0};
          const double w = std::ldexp(1.0, -a.level);
          const double lo = a.shift * w;
          return {lo, lo + 0.5 * w, lo + w};
        } else {
          return {};
        }
      },
      atoms_[static_cast<std::size_t>(k)]);
}

bool BasisFamily::orthonormal() const {
  if (rule_ != InnerProductRule::orthogonal) return false;
  for (double d : norms_) {
    if (std::abs(d - 1.0) > 1e-12) return false;
  }
  return true;
}

bool BasisFamily::ternary(int k) const {
  const auto& a = atoms_[static_cast<std::size_t>(k)];
  return std::holds_alternative<IndicatorAtom>(a) || std::holds_alternative<HaarAtom>(a);
}

std::optional<int> BasisFamily::anchor(int k) const {
  if (anchors_.empty()) return std::nullopt;
  return anchors_[static_cast<std::size_t>(k)];
}

bool BasisFamily::compatible_with(const BasisFamily& other) const {
  return id_ == other.id_ || descriptor_ == other.descriptor_;
}

// ---- constructors --------------------------------------------------------

FamilyWithCertificate histogram_family(const std::vector<Interval>& cells) {
  if (cells.empty()) throw InvalidPartition("histogram needs at least one cell");
  for (const auto& c : cells) {
    if (!(c.hi > c.lo)) throw InvalidPartition("partition cell has non-positive length");
  }
  std::vector<Interval> sorted = cells;
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].lo < sorted[i - 1].hi) throw InvalidPartition("partition cells overlap");
  }
  const double sup_hi = sorted.back().hi;

  std::vector<BasisAtom> atoms;
  nlohmann::json cell_list = nlohmann::json::array();
  for (const auto& c : cells) {
    atoms.push_back(IndicatorAtom{c.lo, c.hi, c.hi == sup_hi});
    cell_list.push_back({c.lo, c.hi});
  }
  nlohmann::json desc = {{"type", "histogram"}, {"params", {{"cells", cell_list}}}};
  auto family = std::make_shared<BasisFamily>(std::move(atoms), InnerProductRule::orthogonal,
                                              Interval{sorted.front().lo, sup_hi}, std::move(desc));
  HpCertificate cert;
  cert.p = std::numeric_limits<double>::infinity();
  cert.c = 1.0;
  for (int k = 0; k < family->size(); ++k) cert.c_k.push_back(1.0 / family->norm_sq(k));
  return {std::move(family), std::move(cert)};
}

FamilyWithCertificate histogram_family(int bins) {
  if (bins < 1) throw InvalidPartition("histogram needs at least one cell");
  std::vector<Interval> cells;
  cells.reserve(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i) {
    cells.push_back({static_cast<double>(i) / bins, static_cast<double>(i + 1) / bins});
  }
  return histogram_family(cells);
}

FamilyWithCertificate haar_family(int max_level) {
  if (max_level < -1 || max_level > 30) throw InvalidLevel("haar level out of range");
  std::vector<BasisAtom> atoms;
  atoms.push_back(HaarAtom{-1, 0});
  for (int j = 0; j <= max_level; ++j) {
    for (int k = 0; k < (1 << j); ++k) atoms.push_back(HaarAtom{j, k});
  }
  nlohmann::json desc = {{"type", "haar"}, {"params", {{"levels", max_level}}}};
  auto family = std::make_shared<BasisFamily>(std::move(atoms), InnerProductRule::orthogonal,
                                              Interval{0.0, 1.0}, std::move(desc));
  HpCertificate cert;
  cert.p = std::numeric_limits<double>::infinity();
  cert.c = 1.0;
  for (int k = 0; k < family->size(); ++k) cert.c_k.push_back(1.0 / family->norm_sq(k));
  return {std::move(family), std::move(cert)};
}

FamilyWithCertificate trig_family(int m, double density_bound) {
  if (m < 1) throw InvalidLevel("trig family needs at least one entry");
  if (!(density_bound > 0.0)) {
    throw std::invalid_argument("trig family needs a positive density bound");
  }
  std::vector<BasisAtom> atoms;
  for (int k = 0; k < m; ++k) atoms.push_back(TrigAtom{k});
  nlohmann::json desc = {{"type", "trig"},
                         {"params", {{"m", m}, {"density_bound", density_bound}}}};
  auto family = std::make_shared<BasisFamily>(std::move(atoms), InnerProductRule::orthogonal,
                                              Interval{0.0, 1.0}, std::move(desc));
  HpCertificate cert;
  cert.p = 1.0;
  cert.c = density_bound;
  cert.c_k.assign(static_cast<std::size_t>(m), 1.0);
  return {std::move(family), std::move(cert)};
}

namespace {

FamilyWithCertificate gaussian_family_impl(const std::vector<double>& centers,
                                           const std::vector<double>& gammas,
                                           bool include_constant, nlohmann::json desc,
                                           std::vector<int> anchors) {
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) throw InvalidBandwidth("kernel bandwidth must be positive");
  }
  if (gammas.empty()) throw InvalidBandwidth("kernel family needs at least one bandwidth");
  std::vector<BasisAtom> atoms;
  atoms.reserve(centers.size() * gammas.size() + 1);
  for (double g : gammas) {
    for (double u : centers) atoms.push_back(GaussianAtom{u, g});
  }
  if (include_constant) {
    atoms.push_back(IndicatorAtom{0.0, 1.0, true});
    if (!anchors.empty()) anchors.push_back(-1);
  }
  auto family = std::make_shared<BasisFamily>(std::move(atoms), InnerProductRule::analytic_gaussian,
                                              Interval{-0.5, 1.5}, std::move(desc),
                                              std::move(anchors));
  HpCertificate cert;
  cert.p = std::numeric_limits<double>::infinity();
  cert.c = 1.0;
  for (int k = 0; k < family->size(); ++k) cert.c_k.push_back(1.0 / family->norm_sq(k));
  return {std::move(family), std::move(cert)};
}

}  // namespace

FamilyWithCertificate gaussian_kernel_family(int n, const std::vector<double>& gammas,
                                             bool include_constant) {
  if (n < 1) throw InvalidBandwidth("kernel grid needs at least one point");
  std::vector<double> centers;
  centers.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) centers.push_back(static_cast<double>(i) / n);
  nlohmann::json desc = {{"type", "gaussian_kernel"},
                         {"params",
                          {{"n", n}, {"gammas", gammas}, {"constant", include_constant}}}};
  return gaussian_family_impl(centers, gammas, include_constant, std::move(desc), {});
}

FamilyWithCertificate data_dependent_family(const Sample& sample,
                                            const std::vector<double>& gammas) {
  if (sample.n() < 2) throw std::invalid_argument("data-dependent family needs at least 2 points");
  std::vector<int> anchors;
  anchors.reserve(sample.points.size() * gammas.size());
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    for (int i = 0; i < sample.n(); ++i) anchors.push_back(i);
  }
  nlohmann::json desc = {{"type", "data_dependent"},
                         {"params", {{"gammas", gammas}, {"anchors", sample.points}}}};
  return gaussian_family_impl(sample.points, gammas, false, std::move(desc), std::move(anchors));
}

// ---- serialization -------------------------------------------------------

FamilyWithCertificate family_from_descriptor(const nlohmann::json& descriptor,
                                             const Sample* data) {
  const std::string type = descriptor.at("type").get<std::string>();
  const nlohmann::json params =
      descriptor.contains("params") ? descriptor.at("params") : nlohmann::json::object();
  if (type == "histogram") {
    if (params.contains("cells")) {
      std::vector<Interval> cells;
      for (const auto& c : params.at("cells")) {
        cells.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
      }
      return histogram_family(cells);
    }
    return histogram_family(params.at("bins").get<int>());
  }
  if (type == "haar") return haar_family(params.at("levels").get<int>());
  if (type == "trig") {
    return trig_family(params.at("m").get<int>(),
                       params.value("density_bound", 2.0));
  }
  if (type == "gaussian_kernel") {
    return gaussian_kernel_family(params.at("n").get<int>(),
                                  params.at("gammas").get<std::vector<double>>(),
                                  params.value("constant", true));
  }
  if (type == "data_dependent") {
    const auto gammas = params.at("gammas").get<std::vector<double>>();
    if (params.contains("anchors")) {
      Sample anchors;
      anchors.points = params.at("anchors").get<std::vector<double>>();
      return data_dependent_family(anchors, gammas);
    }
    if (data == nullptr) {
      throw std::invalid_argument("data-dependent descriptor needs a data sample");
    }
    return data_dependent_family(*data, gammas);
  }
  throw std::invalid_argument("unknown family type: " + type);
}

FamilyWithCertificate family_from_preset(const std::string& name, const Sample* data) {
  const auto dash = name.rfind('-');
  const std::string head = dash == std::string::npos ? name : name.substr(0, dash);
  const std::string tail = dash == std::string::npos ? "" : name.substr(dash + 1);
  if (head == "histogram") return histogram_family(std::stoi(tail));
  if (head == "haar") return haar_family(std::stoi(tail));
  if (head == "trig") return trig_family(std::stoi(tail), 2.0);
  if (name == "multikernel") {
    if (data == nullptr) throw std::invalid_argument("multikernel preset needs data");
    return gaussian_kernel_family(data->n(), {4, 16, 64, 256, 1024, 4096}, true);
  }
  if (head == "svm") {
    if (data == nullptr) throw std::invalid_argument("svm preset needs data");
    return data_dependent_family(*data, {std::stod(tail)});
  }
  throw std::invalid_argument("unknown family preset: " + name);
}

FamilyWithCertificate family_from_spec(const std::string& spec, const Sample* data) {
  const auto first = spec.find_first_not_of(" \t\n");
  if (first != std::string::npos && spec[first] == '{') {
    return family_from_descriptor(nlohmann::json::parse(spec), data);
  }
  return family_from_preset(spec, data);
}

}  // namespace slabdens
