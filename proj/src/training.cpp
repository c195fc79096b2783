#include "chal/training.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chal/ioutil.hpp"
#include "chal/lrp.hpp"

namespace chal {

TrainMethod parse_method(const std::string& name) {
  if (name == "base" || name == "plain") return TrainMethod::plain;
  if (name == "challenger") return TrainMethod::challenger;
  if (name == "random") return TrainMethod::random_challenge;
  if (name == "fgsm") return TrainMethod::fgsm;
  if (name == "pgd") return TrainMethod::pgd;
  throw std::invalid_argument("unknown method '" + name +
                              "' (want base, challenger, random, fgsm, pgd)");
}

std::string method_name(TrainMethod method) {
  switch (method) {
    case TrainMethod::plain: return "base";
    case TrainMethod::challenger: return "challenger";
    case TrainMethod::random_challenge: return "random";
    case TrainMethod::fgsm: return "fgsm";
    case TrainMethod::pgd: return "pgd";
  }
  return "?";
}

namespace {

// rows [0, count) of a batch as their own tensor
Tensor leading_rows(const Tensor& batch, std::size_t count) {
  std::vector<std::size_t> shape = batch.shape();
  shape[0] = count;
  Tensor out(shape);
  std::copy(batch.values().begin(),
            batch.values().begin() + count * batch.row_size(),
            out.values().begin());
  return out;
}

void store_rows(Tensor& batch, const Tensor& rows) {
  std::copy(rows.values().begin(), rows.values().end(),
            batch.values().begin());
}

}  // namespace

TrainResult train_method(Network net, const Dataset& train, TrainMethod method,
                         const TrainOptions& opt) {
  train.validate();
  if (train.size() == 0) {
    throw std::invalid_argument("train: empty dataset");
  }
  if (opt.steps == 0) {
    throw std::invalid_argument("train: steps must be >= 1");
  }
  const std::size_t input_size = train.sample_size();
  const bool uses_challenges = method == TrainMethod::challenger ||
                               method == TrainMethod::random_challenge;
  if (method == TrainMethod::challenger) {
    opt.challenger.validate(net.class_count(), input_size);
  } else if (method == TrainMethod::random_challenge) {
    // rank pool is unused here, so only the perturbation fields matter
    if (opt.challenger.resolved_n_features(input_size) > input_size) {
      throw std::invalid_argument("train: n_features exceeds input size");
    }
  } else if (method == TrainMethod::fgsm || method == TrainMethod::pgd) {
    opt.adversarial.validate();
  }

  // stream 0 orders the data, stream 1 feeds every perturbation draw;
  // methods that never touch stream 1 still see identical batches
  const std::uint64_t order_seed = derive_seed(opt.seed, 0);
  Rng challenge_rng(derive_seed(opt.seed, 1));

  AdamState adam(net, opt.adam);
  TrainResult result{std::move(net), {}};
  result.log.reserve(opt.steps);

  std::size_t epoch = 0;
  std::vector<std::vector<std::size_t>> plan =
      batch_indices(train.size(), opt.batch_size, derive_seed(order_seed, 0));
  std::size_t plan_at = 0;

  for (std::size_t step = 0; step < opt.steps; ++step) {
    if (plan_at == plan.size()) {
      ++epoch;
      plan = batch_indices(train.size(), opt.batch_size,
                           derive_seed(order_seed, epoch));
      plan_at = 0;
    }
    const Batch batch = gather(train, plan[plan_at++]);
    const std::size_t b = batch.inputs.dim(0);
    const auto count_a = static_cast<std::size_t>(
        std::floor(opt.challenger.split.challenge_a * static_cast<double>(b)));
    const auto count_b = static_cast<std::size_t>(
        std::floor(opt.challenger.split.challenge_b * static_cast<double>(b)));
    const std::size_t touched = count_a + count_b;

    StepRecord record;
    record.step = step;

    Tensor train_inputs = batch.inputs;
    if (uses_challenges) {
      const std::size_t n =
          opt.challenger.resolved_n_features(input_size);
      ModificationSet mods;
      mods.features.resize(b);
      mods.modes.resize(b, TopMode::highest);
      if (method == TrainMethod::challenger) {
        const ForwardTrace probe = forward_traced(result.net, batch.inputs);
        const std::size_t k =
            choose_rank(probe.logits, opt.challenger.top_k, challenge_rng);
        record.rank_k = k;
        const auto classes = rank_classes(probe.logits, k);
        const auto maps = batch_lrp(result.net, probe, classes,
                                    opt.challenger.epsilon_rule);
        for (std::size_t s = 0; s < b; ++s) {
          mods.modes[s] = challenge_rng.below(2) == 0 ? TopMode::highest
                                                      : TopMode::lowest;
          mods.features[s] = select_features(maps[s], n, mods.modes[s]);
        }
      } else {
        for (std::size_t s = 0; s < b; ++s) {
          mods.features[s] =
              random_select_features(input_size, n, challenge_rng);
        }
      }
      train_inputs = apply_challenges(batch.inputs, mods, opt.challenger);
    } else if (method != TrainMethod::plain && touched > 0) {
      const std::vector<std::size_t> sub_labels(batch.labels.begin(),
                                                batch.labels.begin() + touched);
      Tensor sub = leading_rows(batch.inputs, touched);
      if (method == TrainMethod::fgsm) {
        const ForwardTrace probe = forward_traced(result.net, sub);
        const Gradients g = backward(result.net, probe, sub_labels);
        sub = fgsm_perturb(sub, g.input, opt.adversarial.eps);
      } else {
        sub = pgd_perturb(result.net, sub, sub_labels, opt.adversarial);
      }
      store_rows(train_inputs, sub);
    }

    if (method != TrainMethod::plain) {
      record.modified.assign(batch.indices.begin(),
                             batch.indices.begin() + touched);
    }

    const ForwardTrace trace = forward_traced(result.net, train_inputs);
    const Gradients grads = backward(result.net, trace, batch.labels);
    adam_step(result.net, grads, adam);
    record.loss = grads.loss;
    result.log.push_back(std::move(record));
  }
  return result;
}

TrainResult train_with_challenger(Network net, const Dataset& train,
                                  const TrainOptions& opt) {
  return train_method(std::move(net), train, TrainMethod::challenger, opt);
}

TrainResult train_baseline(Network net, const Dataset& train,
                           TrainMethod variant, const TrainOptions& opt) {
  if (variant == TrainMethod::challenger) {
    throw std::invalid_argument("train_baseline: challenger is not a baseline");
  }
  return train_method(std::move(net), train, variant, opt);
}

std::string step_log_csv(const std::vector<StepRecord>& log) {
  std::ostringstream os;
  os << "step,loss,rank_k,modified_sample_indices\n";
  for (const StepRecord& r : log) {
    os << r.step << "," << format_double(r.loss) << "," << r.rank_k << ",";
    for (std::size_t i = 0; i < r.modified.size(); ++i) {
      os << (i == 0 ? "" : ";") << r.modified[i];
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace chal
