#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "chal/adversarial.hpp"
#include "chal/challenge.hpp"
#include "chal/data.hpp"
#include "chal/network.hpp"

namespace chal {

// plain            ordinary minibatch training
// challenger       relevance-guided perturbation of half of each batch
// random_challenge same perturbations with randomly drawn feature sets
// fgsm / pgd       adversarial perturbation of half of each batch
enum class TrainMethod { plain, challenger, random_challenge, fgsm, pgd };

TrainMethod parse_method(const std::string& name);
std::string method_name(TrainMethod method);

struct TrainOptions {
  std::size_t steps = 100;
  std::size_t batch_size = 10;
  AdamConfig adam;
  ChallengerConfig challenger;
  AdversarialConfig adversarial;
  // Master seed. Batch order and perturbation draws run on separate derived
  // streams, so methods see identical data order under the same seed.
  std::uint64_t seed = 1;
};

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;          // on the (possibly modified) batch
  std::size_t rank_k = 0;     // 0 when the method draws no rank
  std::vector<std::size_t> modified;  // dataset indices of modified samples
};

struct TrainResult {
  Network net;
  std::vector<StepRecord> log;
};

// One optimizer step per entry in [0, steps); epochs advance as the shuffled
// dataset is consumed. Losses always use the original labels.
TrainResult train_method(Network net, const Dataset& train, TrainMethod method,
                         const TrainOptions& opt);

TrainResult train_with_challenger(Network net, const Dataset& train,
                                  const TrainOptions& opt);

TrainResult train_baseline(Network net, const Dataset& train,
                           TrainMethod variant, const TrainOptions& opt);

// CSV with header "step,loss,rank_k,modified_sample_indices"; the index list
// is ';'-joined inside the last column.
std::string step_log_csv(const std::vector<StepRecord>& log);

}  // namespace chal
