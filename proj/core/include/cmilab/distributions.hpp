#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "cmilab/state.hpp"

namespace cmilab {

/// Dense probability table over the outcomes of `sites` (labels into some
/// register). Outcome index is mixed radix over `dims`, first site most
/// significant.
class Distribution {
 public:
  Distribution() = default;
  Distribution(std::vector<int> sites, std::vector<int> dims, std::vector<double> probs);

  const std::vector<int>& sites() const { return sites_; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double prob(const std::vector<int>& digits) const;

  /// Position of a site label inside `sites()`; throws if absent.
  int position_of(int site) const;
  std::vector<int> positions_of(const std::vector<int>& site_labels) const;

  /// `outcome,prob` with the outcome written as a digit string.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<int> sites_;
  std::vector<int> dims_;
  std::vector<double> probs_;
};

Distribution measurement_distribution(const PureState& state, const std::vector<int>& sites);
Distribution measurement_distribution(const PureState& state);

Distribution marginal(const Distribution& dist, const std::vector<int>& target);
/// p(target | given = value). Throws std::domain_error if p(given = value) is 0.
Distribution conditional(const Distribution& dist, const std::vector<int>& target,
                         const std::vector<int>& given, const std::vector<int>& value);

double entropy(const Distribution& dist, LogBase base = LogBase::Two);
/// Returns +inf when supp(p) is not contained in supp(q).
double kl_divergence(const Distribution& p, const Distribution& q, LogBase base = LogBase::E);
/// sum_x |p(x) - q(x)|
double l1_distance(const Distribution& p, const Distribution& q);

struct CmiReport {
  double cmi = 0;               // four-entropy identity
  double cmi_definitional = 0;  // E_B KL(p_AC|B || p_A|B p_C|B)
  LogBase base = LogBase::Two;
  double pinsker_residual = 0;  // E_B || p_AC|B - p_A|B p_C|B ||_1
  SitePartition partition;

  double cmi_nats() const;
};

/// Outcomes with p(x_B) below this are left out of E_B averages.
inline constexpr double kConditioningFloor = 1e-14;

CmiReport cmi(const Distribution& dist, const SitePartition& partition, LogBase base = LogBase::Two);

/// E_{x_B} S(rho_{A | x_B}).
double holevo_avg_entropy(const PureState& state, const SitePartition& partition,
                          LogBase base = LogBase::Two);

struct DecayFit {
  double xi = 0;
  double alpha = 0;
  double residual = 0;  // RMS of log residuals
  bool diverged = false;
  bool vanished = false;  // fewer than two points above the floor
  int points_used = 0;
};

inline constexpr double kFitFloor = 1e-12;

DecayFit fit_cmi_length(const std::vector<std::pair<double, double>>& points);

}  // namespace cmilab
