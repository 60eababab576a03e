#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace unicrop::learners {

// Dense design matrix with named columns. Models match schema by name at
// predict time, so column order may differ between fit and predict.
struct Dataset {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows; // [row][column]

    size_t row_count() const { return rows.size(); }
    size_t column_count() const { return names.size(); }
};

class Regressor {
  public:
    virtual ~Regressor() = default;
    virtual const std::string& name() const = 0;
    virtual std::vector<double> predict(const Dataset& data) const = 0;
};

struct ElasticNetOptions {
    double alpha = 0.1;
    double l1_ratio = 0.5;
    size_t max_iter = 10000;
    double tol = 1e-6;
};

struct RandomForestOptions {
    size_t trees = 300;
    size_t mtry = 0; // 0 resolves to ceil(p/3)
    size_t min_leaf = 2;
    bool bootstrap = true;
};

struct GradientBoostingOptions {
    size_t rounds = 500;
    double learning_rate = 0.05;
    size_t max_depth = 3;
    double subsample = 0.8;
    size_t min_leaf = 5;
};

struct SvrOptions {
    double cost = 10.0;
    double epsilon = 0.1;
    double gamma = 0.0; // 0 resolves to 1 / (p * var(X))
    double tol = 1e-3;
    size_t max_passes = 50; // consecutive update-free passes before stopping
};

// Cyclic coordinate descent on
//   (1/2n)||y - Xw - b||^2 + alpha*(l1_ratio*||w||_1 + (1-l1_ratio)/2*||w||^2)
// with an unpenalised intercept.
class ElasticNet final : public Regressor {
  public:
    static ElasticNet fit(const Dataset& data, const std::vector<double>& target,
                          const ElasticNetOptions& options = ElasticNetOptions());

    const std::string& name() const override { return name_; }
    std::vector<double> predict(const Dataset& data) const override;

    const std::vector<double>& weights() const { return weights_; }
    double intercept() const { return intercept_; }

    // Largest KKT violation of the fitted solution (test hook).
    double kkt_violation(const Dataset& data, const std::vector<double>& target) const;

  private:
    std::string name_ = "elastic_net";
    std::vector<std::string> fit_names_;
    std::vector<double> weights_;
    double intercept_ = 0.0;
    ElasticNetOptions options_;
};

// Exact greedy variance-reduction regression tree shared by the forest and
// the boosting machine.
class RegressionTree {
  public:
    struct Options {
        size_t max_depth = 0; // 0 = unbounded
        size_t min_leaf = 1;
        size_t mtry = 0; // 0 = all features
    };

    void fit(const std::vector<std::vector<double>>& columns, const std::vector<double>& target,
             const std::vector<size_t>& rows, const Options& options, std::uint64_t seed);

    double predict_row(const double* values) const;

  private:
    struct Node {
        bool leaf = true;
        size_t feature = 0;
        double threshold = 0.0;
        double value = 0.0;
        size_t left = 0;
        size_t right = 0;
    };
    std::vector<Node> nodes_;

    size_t build(const std::vector<std::vector<double>>& columns,
                 const std::vector<double>& target, std::vector<size_t>& rows, size_t begin,
                 size_t end, size_t depth, const Options& options, class TreeRng& rng);
};

class RandomForest final : public Regressor {
  public:
    static RandomForest fit(const Dataset& data, const std::vector<double>& target,
                            const RandomForestOptions& options, std::uint64_t seed);

    const std::string& name() const override { return name_; }
    std::vector<double> predict(const Dataset& data) const override;

  private:
    std::string name_ = "random_forest";
    std::vector<std::string> fit_names_;
    std::vector<RegressionTree> trees_;
};

// Stagewise least-squares boosting: mean start, depth-capped residual trees
// on seeded row subsamples, exact splits.
class GradientBoosting final : public Regressor {
  public:
    static GradientBoosting fit(const Dataset& data, const std::vector<double>& target,
                                const GradientBoostingOptions& options, std::uint64_t seed);

    const std::string& name() const override { return name_; }
    std::vector<double> predict(const Dataset& data) const override;

    // Training loss trace (one MSE per round, test hook).
    const std::vector<double>& training_mse() const { return training_mse_; }

  private:
    std::string name_ = "gradient_boosting";
    std::vector<std::string> fit_names_;
    double base_ = 0.0;
    double learning_rate_ = 0.0;
    std::vector<RegressionTree> trees_;
    std::vector<double> training_mse_;
};

// Epsilon-insensitive RBF support-vector regression solved by pairwise SMO
// steps on the dual (beta = alpha - alpha*), keeping sum(beta) = 0.
class SvrRbf final : public Regressor {
  public:
    static SvrRbf fit(const Dataset& data, const std::vector<double>& target,
                      const SvrOptions& options, std::uint64_t seed,
                      std::vector<std::string>* warnings = nullptr);

    const std::string& name() const override { return name_; }
    std::vector<double> predict(const Dataset& data) const override;

    double bias() const { return bias_; }
    double gamma() const { return gamma_; }

    // Dual objective value attained by the fitted solution (test hook).
    double dual_objective(const Dataset& data, const std::vector<double>& target) const;

  private:
    std::string name_ = "svr_rbf";
    std::vector<std::string> fit_names_;
    std::vector<std::vector<double>> support_rows_;
    std::vector<double> beta_;
    double bias_ = 0.0;
    double gamma_ = 0.0;
    double epsilon_ = 0.1;
    double cost_ = 10.0;
};

std::unique_ptr<Regressor> fit_elastic_net(const Dataset& data, const std::vector<double>& target,
                                           const ElasticNetOptions& options = ElasticNetOptions());
std::unique_ptr<Regressor> fit_random_forest(const Dataset& data,
                                             const std::vector<double>& target,
                                             const RandomForestOptions& options,
                                             std::uint64_t seed);
std::unique_ptr<Regressor> fit_gradient_boosting(const Dataset& data,
                                                 const std::vector<double>& target,
                                                 const GradientBoostingOptions& options,
                                                 std::uint64_t seed);
std::unique_ptr<Regressor> fit_svr_rbf(const Dataset& data, const std::vector<double>& target,
                                       const SvrOptions& options, std::uint64_t seed,
                                       std::vector<std::string>* warnings = nullptr);

// Column permutation mapping the model's fit-time schema onto `data`;
// throws SchemaMismatch when names do not line up.
std::vector<size_t> schema_permutation(const std::vector<std::string>& fit_names,
                                       const Dataset& data);

} // namespace unicrop::learners
