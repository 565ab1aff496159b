#include "recurtune/sim.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "recurtune/errors.h"

namespace recurtune {
namespace {

std::vector<PowerProfile> JobProfiles(const TraceBundle& traces, int batch_size,
                                      int slice, const JobSpec& job) {
  std::vector<PowerProfile> out;
  for (const auto& p : traces.Profiles(batch_size, slice)) {
    if (std::find(job.power_limits.begin(), job.power_limits.end(), p.power_limit) !=
        job.power_limits.end()) {
      out.push_back(p);
    }
  }
  if (out.size() != job.power_limits.size()) {
    throw ValidationError({"traces lack power profiles for b=" + std::to_string(batch_size) +
                           ", slice " + std::to_string(slice)});
  }
  return out;
}

const PowerProfile& ProfileAt(std::span<const PowerProfile> profiles, double power_limit) {
  for (const auto& p : profiles) {
    if (p.power_limit == power_limit) return p;
  }
  throw ValidationError({"no power profile at the chosen limit"});
}

void CheckCoverage(const JobSpec& job, const TraceBundle& traces, const SliceMap& slices) {
  ValidateOrThrow(job);
  std::vector<std::string> problems;
  const auto& bs = traces.batch_sizes();
  const auto& ps = traces.power_limits();
  for (int b : job.batch_sizes) {
    if (!std::binary_search(bs.begin(), bs.end(), b)) {
      problems.push_back("traces lack batch size " + std::to_string(b));
    }
  }
  for (double p : job.power_limits) {
    if (!std::binary_search(ps.begin(), ps.end(), p)) {
      problems.push_back("traces lack power limit " + FormatDouble(p));
    }
  }
  std::set<int> used;
  for (int t = 0; t < job.recurrences; ++t) used.insert(slices.SliceAt(t));
  for (int s : used) {
    if (!std::binary_search(traces.slices().begin(), traces.slices().end(), s)) {
      problems.push_back("traces lack slice " + std::to_string(s));
    }
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

}  // namespace

JobSpec JobFromBundle(const TraceBundle& bundle, double eta, double beta, int recurrences,
                      std::optional<int> window, std::uint64_t seed) {
  JobSpec job;
  job.job_id = bundle.metadata().job_id;
  job.batch_sizes = bundle.batch_sizes();
  job.power_limits = bundle.power_limits();
  job.default_batch_size = bundle.metadata().default_batch_size;
  job.max_power = bundle.metadata().max_power;
  job.eta = eta;
  job.beta = beta;
  job.recurrences = recurrences;
  job.window = window;
  job.max_epochs = bundle.metadata().max_epochs;
  job.rng_seed = seed;
  return job;
}

CostSample RunRecurrence(const JobSpec& job, int recurrence, int batch_size,
                         std::optional<double> fixed_power_limit, const TraceBundle& traces,
                         ProfileCache& cache, std::optional<double> threshold, int slice,
                         Rng& rng) {
  const auto profiles = JobProfiles(traces, batch_size, slice, job);
  const auto records = traces.Records(batch_size, slice);
  if (records.empty()) {
    throw ValidationError({"no seed replicas for b=" + std::to_string(batch_size) +
                           ", slice " + std::to_string(slice)});
  }

  bool profiled = false;
  double power_limit = 0.0;
  EpochUsage first_epoch;
  if (fixed_power_limit) {
    power_limit = *fixed_power_limit;
  } else {
    const ProfileCache::Entry* entry = cache.Find(batch_size);
    if (entry == nullptr) {
      entry = &cache.Insert(profiles, job.power_limits, job.eta, job.max_power);
      profiled = true;
      first_epoch = entry->profiling_epoch;
    }
    power_limit = entry->choice.power_limit;
  }
  const EpochUsage steady = SteadyEpochCost(ProfileAt(profiles, power_limit));
  if (!profiled) first_epoch = steady;

  const TrainingRecord& record = records[rng.UniformIndex(records.size())];
  const bool reaches = record.converged() && *record.epochs_to_target <= job.max_epochs;
  const int target = reaches ? *record.epochs_to_target : job.max_epochs;

  double time = 0.0;
  double energy = 0.0;
  int epochs = 0;
  bool early_stopped = false;
  while (epochs < target) {
    const EpochUsage& next = epochs == 0 ? first_epoch : steady;
    if (threshold && epochs > 0 &&
        BlendedCost(energy + next.energy, time + next.time, job.eta, job.max_power) >
            *threshold) {
      early_stopped = true;
      break;
    }
    time += next.time;
    energy += next.energy;
    ++epochs;
  }
  const bool converged = reaches && !early_stopped;
  return MakeCostSample(recurrence, {batch_size, power_limit}, energy, time, job.eta,
                        job.max_power, epochs, converged, early_stopped, profiled);
}

ArrivalSchedule ArrivalSchedule::Uniform(int recurrences, double spacing) {
  ArrivalSchedule s;
  for (int t = 0; t < recurrences; ++t) s.submissions.emplace_back(t, t * spacing);
  return s;
}

ArrivalSchedule ArrivalSchedule::BackToBack(const ExperimentResult& result) {
  ArrivalSchedule s;
  double clock = 0.0;
  for (const auto& r : result.records) {
    s.submissions.emplace_back(r.recurrence, clock);
    clock = clock + r.sample.time;
  }
  return s;
}

std::vector<std::string> ValidateSchedule(const ArrivalSchedule& schedule, int recurrences) {
  std::vector<std::string> problems;
  if (static_cast<int>(schedule.submissions.size()) != recurrences) {
    problems.push_back("schedule has " + std::to_string(schedule.submissions.size()) +
                       " submissions for " + std::to_string(recurrences) + " recurrences");
  }
  for (std::size_t i = 0; i < schedule.submissions.size(); ++i) {
    const auto& [t, at] = schedule.submissions[i];
    if (t != static_cast<int>(i)) {
      problems.push_back("submission " + std::to_string(i) + " has recurrence " +
                         std::to_string(t) + "; indices must be contiguous from 0");
    }
    if (!std::isfinite(at) || at < 0.0) {
      problems.push_back("submission " + std::to_string(i) + " has an invalid time");
    }
    if (i > 0 && at < schedule.submissions[i - 1].second) {
      problems.push_back("submit times decrease at submission " + std::to_string(i));
    }
  }
  return problems;
}

int SliceMap::SliceAt(int recurrence) const {
  int slice = 0;
  for (const auto& [start, s] : starts) {
    if (start <= recurrence) slice = s;
  }
  return slice;
}

SliceMap SliceMap::Even(int slices, int recurrences) {
  SliceMap m;
  for (int s = 0; s < slices; ++s) {
    const long long start = static_cast<long long>(s) * recurrences / slices;
    if (m.starts.empty() || m.starts.back().first != start) {
      m.starts.emplace_back(static_cast<int>(start), s);
    } else {
      m.starts.back().second = s;
    }
  }
  return m;
}

double ExperimentResult::TotalCost() const {
  double sum = 0.0;
  for (const auto& r : records) sum += r.sample.cost;
  return sum;
}

double ExperimentResult::TotalRegret() const {
  return cumulative_regret.empty() ? 0.0 : cumulative_regret.back();
}

double ExperimentResult::MeanCostFrom(std::size_t first) const {
  if (first >= records.size()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = first; i < records.size(); ++i) sum += records[i].sample.cost;
  return sum / static_cast<double>(records.size() - first);
}

Optimum SliceOptimum(const TraceBundle& traces, int slice, const JobSpec& job) {
  ExpectedEpochs expected;
  for (const auto& [b, e] : MeanConvergedEpochs(traces.SliceRecords(slice), slice)) {
    if (std::binary_search(job.batch_sizes.begin(), job.batch_sizes.end(), b)) {
      expected[b] = e;
    }
  }
  std::vector<PowerProfile> profiles;
  for (const auto& [b, e] : expected) {
    auto some = JobProfiles(traces, b, slice, job);
    profiles.insert(profiles.end(), some.begin(), some.end());
  }
  return BruteForceOptimum(expected, profiles, job.eta, job.max_power);
}

double PseudoRegret(const CostSample& sample, const TraceBundle& traces, int slice,
                    const JobSpec& job, const Optimum& optimum) {
  if (!sample.converged) return Regret(sample.cost + optimum.cost, optimum.cost);
  const auto expected = MeanConvergedEpochs(traces.Records(sample.config.batch_size, slice), slice);
  const double epochs = expected.at(sample.config.batch_size);
  const auto profiles = JobProfiles(traces, sample.config.batch_size, slice, job);
  const double epoch_cost =
      EpochCost(ProfileAt(profiles, sample.config.power_limit), job.eta, job.max_power);
  double cost = JobCost(epochs, epoch_cost);
  if (sample.profiled) {
    const EpochUsage prof = ProfilingEpochCost(profiles, job.power_limits);
    cost += BlendedCost(prof.energy, prof.time, job.eta, job.max_power) - epoch_cost;
  }
  return Regret(cost, optimum.cost);
}

ExperimentResult RunExperiment(const JobSpec& job, const TraceBundle& traces,
                               const ExperimentOptions& options) {
  CheckCoverage(job, traces, options.slices);
  if (options.schedule) {
    auto problems = ValidateSchedule(*options.schedule, job.recurrences);
    if (!problems.empty()) throw ValidationError(std::move(problems));
  }

  ExperimentResult result;
  result.policy = PolicyName(options.policy);
  result.seed = job.rng_seed;
  result.job = job;
  result.records.resize(static_cast<std::size_t>(job.recurrences));

  auto policy = MakePolicy(options.policy, job);
  ProfileCache cache;
  Rng rng(job.rng_seed);

  struct Running {
    double completion;
    int recurrence;
  };
  // Ordered by completion time, then submission order.
  std::vector<Running> running;
  auto deliver_until = [&](double now, bool all) {
    std::stable_sort(running.begin(), running.end(), [](const Running& a, const Running& b) {
      return a.completion < b.completion ||
             (a.completion == b.completion && a.recurrence < b.recurrence);
    });
    std::size_t done = 0;
    while (done < running.size() && (all || running[done].completion <= now)) {
      policy->Report(result.records[static_cast<std::size_t>(running[done].recurrence)].sample);
      result.report_order.push_back(running[done].recurrence);
      ++done;
    }
    running.erase(running.begin(), running.begin() + static_cast<std::ptrdiff_t>(done));
  };

  for (int t = 0; t < job.recurrences; ++t) {
    double submit = 0.0;
    if (options.schedule) {
      submit = options.schedule->submissions[static_cast<std::size_t>(t)].second;
      deliver_until(submit, false);
    }
    const int slice = options.slices.SliceAt(t);
    if (!result.optimum.contains(slice)) {
      result.optimum.emplace(slice, SliceOptimum(traces, slice, job));
    }
    const Decision d = policy->Issue(t, rng);
    auto& rec = result.records[static_cast<std::size_t>(t)];
    rec.recurrence = t;
    rec.slice = slice;
    rec.phase = d.phase;
    rec.threshold = d.threshold;
    rec.sample = RunRecurrence(job, t, d.batch_size, d.power_limit, traces, cache,
                               d.threshold, slice, rng);
    rec.regret = PseudoRegret(rec.sample, traces, slice, job, result.optimum.at(slice));
    if (options.schedule) {
      running.push_back({submit + rec.sample.time, t});
    } else {
      policy->Report(rec.sample);
      result.report_order.push_back(t);
    }
  }
  deliver_until(0.0, true);

  std::vector<double> regrets;
  regrets.reserve(result.records.size());
  for (const auto& r : result.records) regrets.push_back(r.regret);
  result.cumulative_regret = CumulativeRegret(regrets);
  return result;
}

ExperimentResult RunDriftExperiment(JobSpec job, const TraceBundle& traces,
                                    std::optional<int> window, const SliceMap& slices) {
  job.window = window;
  return RunExperiment(job, traces, ExperimentOptions{PolicyKind::kZeus, std::nullopt, slices});
}

bool HasOverlap(const ArrivalSchedule& schedule, const ExperimentResult& result) {
  double latest_completion = -1.0;
  for (std::size_t i = 0; i < schedule.submissions.size() && i < result.records.size(); ++i) {
    const double submit = schedule.submissions[i].second;
    if (submit < latest_completion) return true;
    latest_completion = std::max(latest_completion, submit + result.records[i].sample.time);
  }
  return false;
}

ExperimentResult RunConcurrentExperiment(const JobSpec& job, const TraceBundle& traces,
                                         const ArrivalSchedule& schedule) {
  auto result =
      RunExperiment(job, traces, ExperimentOptions{PolicyKind::kZeus, schedule, {}});
  if (!HasOverlap(schedule, result)) {
    throw ValidationError({"schedule has no overlapping submissions"});
  }
  return result;
}

std::vector<std::string> AuditEarlyStop(const ExperimentResult& result,
                                        const TraceBundle& traces) {
  std::vector<std::string> problems;
  const JobSpec& job = result.job;
  for (const auto& r : result.records) {
    if (!r.threshold) {
      if (r.sample.early_stopped) {
        problems.push_back("recurrence " + std::to_string(r.recurrence) +
                           " early-stopped without a threshold");
      }
      continue;
    }
    const auto profiles = JobProfiles(traces, r.sample.config.batch_size, r.slice, job);
    const double epoch =
        EpochCost(ProfileAt(profiles, r.sample.config.power_limit), job.eta, job.max_power);
    const double bound = *r.threshold + epoch;
    if (r.sample.cost > bound * (1.0 + 1e-12)) {
      problems.push_back("recurrence " + std::to_string(r.recurrence) + " cost " +
                         FormatDouble(r.sample.cost) + " exceeds threshold plus one epoch " +
                         FormatDouble(bound));
    }
  }
  return problems;
}

std::vector<std::string> AuditResult(const ExperimentResult& result,
                                     const TraceBundle& traces) {
  std::vector<std::string> problems = AuditEarlyStop(result, traces);
  const JobSpec& job = result.job;
  std::set<int> profiled;
  double sum = 0.0;
  if (result.cumulative_regret.size() != result.records.size()) {
    problems.emplace_back("cumulative regret length differs from the record count");
  }
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    const auto& s = r.sample;
    if (r.recurrence != static_cast<int>(i) || s.recurrence != r.recurrence) {
      problems.push_back("record " + std::to_string(i) + " is out of order");
    }
    if (s.cost != BlendedCost(s.energy, s.time, job.eta, job.max_power)) {
      problems.push_back("recurrence " + std::to_string(i) +
                         " cost differs from the blended cost of its energy and time");
    }
    if (s.profiled && !profiled.insert(s.config.batch_size).second) {
      problems.push_back("batch size " + std::to_string(s.config.batch_size) +
                         " profiled more than once");
    }
    sum += r.regret;
    if (i < result.cumulative_regret.size() && result.cumulative_regret[i] != sum) {
      problems.push_back("cumulative regret at " + std::to_string(i) +
                         " is not the prefix sum");
    }
  }
  std::vector<int> reported = result.report_order;
  std::sort(reported.begin(), reported.end());
  bool once = reported.size() == result.records.size();
  for (std::size_t i = 0; once && i < reported.size(); ++i) {
    once = reported[i] == static_cast<int>(i);
  }
  if (!once) problems.emplace_back("recurrences are not each reported exactly once");
  return problems;
}

}  // namespace recurtune
