#include "xlex/align.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <unordered_map>

#include "xlex/error.hpp"

namespace xlex {

namespace {

constexpr double kDegenerateNorm = 1e-12;
// Similarity blocks are capped at this many entries (32 MiB of doubles).
constexpr Eigen::Index kBlockBudget = Eigen::Index{1} << 22;

// One pass with a small descending buffer; summation runs from the largest
// value down, the same order as a full sort.
double top_k_mean(const double* values, std::size_t n, std::size_t k) {
    if (k == 0 || k > n) throw ParameterError("top-k size out of range");
    std::vector<double> top(values, values + k);
    std::sort(top.begin(), top.end(), std::greater<>());
    for (std::size_t i = k; i < n; ++i) {
        const double v = values[i];
        if (!(v > top[k - 1])) continue;
        std::size_t pos = k - 1;
        while (pos > 0 && top[pos - 1] < v) {
            top[pos] = top[pos - 1];
            --pos;
        }
        top[pos] = v;
    }
    double sum = 0;
    for (double v : top) sum += v;
    return sum / static_cast<double>(k);
}

// Runs fn(block) for block = 0..n-1 on up to `threads` workers. Results must
// go to disjoint, block-indexed storage so the outcome is thread-independent.
void parallel_blocks(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n);
    if (workers <= 1) {
        for (std::size_t b = 0; b < n; ++b) fn(b);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t b = w; b < n; b += workers) fn(b);
        });
    }
}

void unit_rows(Matrix& m, const Vocabulary* vocab) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double n = m.row(i).norm();
        if (!(n > kDegenerateNorm)) {
            throw DegenerateVectorError(vocab ? vocab->word(static_cast<std::size_t>(i))
                                              : "#" + std::to_string(i));
        }
        m.row(i) /= n;
    }
}

void center_columns(Matrix& m) {
    const Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;
}

void normalize_in_place(Matrix& m, const Vocabulary* vocab) {
    unit_rows(m, vocab);
    center_columns(m);
    unit_rows(m, vocab);
}

// Block of `rows` rows of a against rows [0, b_rows) of b.
struct BlockPlan {
    Eigen::Index rows_per_block;
    std::size_t blocks;
};

BlockPlan plan_blocks(Eigen::Index a_rows, Eigen::Index b_rows) {
    const Eigen::Index per = std::max<Eigen::Index>(1, kBlockBudget / std::max<Eigen::Index>(b_rows, 1));
    const Eigen::Index rows = std::min(per, a_rows);
    return {rows, static_cast<std::size_t>((a_rows + rows - 1) / rows)};
}

// Counter-based SplitMix64 stream, cheap enough to create per row.
class RowRng {
public:
    using result_type = std::uint64_t;
    RowRng(std::uint64_t seed, std::uint64_t round, std::uint64_t direction, std::uint64_t row)
        : state_(mix(mix(mix(mix(seed) ^ round) ^ direction) ^ row)) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return mix(state_ += 0x9e3779b97f4a7c15ULL); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

std::size_t argmax_row(const double* row, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (row[j] > row[best]) best = j;
    }
    return best;
}

// Stochastic CSLS argmax of one row: each candidate survives with probability
// keep_prob. Falls back to the full argmax when every candidate is dropped.
std::size_t dropout_argmax(const double* scores, std::size_t n, double keep_prob,
                           RowRng& rng) {
    if (keep_prob >= 1.0) return argmax_row(scores, n);
    const auto threshold = static_cast<std::uint64_t>(keep_prob * 65536.0);
    std::size_t best = n;
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if ((j & 3) == 0) bits = rng();
        const std::uint64_t draw = (bits >> ((j & 3) * 16)) & 0xffffu;
        if (draw >= threshold) continue;
        if (best == n || scores[j] > scores[best]) best = j;
    }
    return best == n ? argmax_row(scores, n) : best;
}

void fix_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        Eigen::Index arg = 0;
        u.col(k).cwiseAbs().maxCoeff(&arg);
        if (u(arg, k) < 0) {
            u.col(k) = -u.col(k);
            v.col(k) = -v.col(k);
        }
    }
}

struct Svd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};

Svd svd(const Eigen::MatrixXd& m, bool full) {
    const unsigned opts = full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                               : (Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::BDCSVD<Eigen::MatrixXd> solver(m, opts);
    Svd r{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    fix_signs(r.u, r.v);
    return r;
}

Matrix gather_rows(const Matrix& m, const Dictionary& dict, bool source) {
    Matrix out(static_cast<Eigen::Index>(dict.size()), m.cols());
    for (std::size_t i = 0; i < dict.size(); ++i) {
        const auto r = source ? dict[i].source : dict[i].target;
        if (r < 0 || r >= m.rows()) throw ParameterError("dictionary index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(r);
    }
    return out;
}

void check_mapping_inputs(const Matrix& x, const Matrix& z, const Dictionary& dict) {
    if (x.cols() != z.cols()) throw DimensionMismatchError(x.cols(), z.cols());
    if (dict.empty()) throw ParameterError("cannot solve a mapping from an empty dictionary");
}

// Square root of X X^T (the U S U^T factor), computed from a thin SVD.
Matrix gram_root(const Matrix& x) {
    Eigen::BDCSVD<Eigen::MatrixXd> solver(x, Eigen::ComputeThinU);
    const Eigen::MatrixXd us = solver.matrixU() * solver.singularValues().asDiagonal();
    return us * solver.matrixU().transpose();
}

}  // namespace

void AlignmentConfig::validate() const {
    if (csls_k < 1) throw ParameterError("csls_k must be >= 1");
    if (vocab_cutoff < 2) throw ParameterError("vocab_cutoff must be >= 2");
    if (init_vocab < 2) throw ParameterError("init_vocab must be >= 2");
    if (max_iterations < 1) throw ParameterError("max_iterations must be positive");
    if (!(convergence_tol >= 0)) throw ParameterError("convergence_tol must be non-negative");
    if (!(initial_keep_prob > 0 && initial_keep_prob <= 1)) {
        throw ParameterError("keep probability must be in (0, 1]");
    }
    if (!(keep_prob_growth > 1)) throw ParameterError("keep_prob_growth must exceed 1");
    if (stagnation_window < 1) throw ParameterError("stagnation_window must be positive");
    if (restarts < 1) throw ParameterError("restarts must be >= 1");
}

EmbeddingMatrix normalize(const EmbeddingMatrix& m) {
    Matrix values = m.values();
    normalize_in_place(values, &m.vocab());
    return EmbeddingMatrix(m.vocab(), std::move(values));
}

double top_k_mean(std::vector<double>& values, std::size_t k) {
    return top_k_mean(values.data(), values.size(), k);
}

Matrix csls(const Matrix& sim, int k) {
    if (k < 1 || k > sim.rows() || k > sim.cols()) {
        throw ParameterError("csls k=" + std::to_string(k) + " exceeds the similarity matrix " +
                             std::to_string(sim.rows()) + "x" + std::to_string(sim.cols()));
    }
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> r_t(static_cast<std::size_t>(sim.rows()));
    std::vector<double> r_s(static_cast<std::size_t>(sim.cols()));
    std::vector<double> buf;
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
        buf.assign(sim.row(i).data(), sim.row(i).data() + sim.cols());
        r_t[static_cast<std::size_t>(i)] = top_k_mean(buf, kk);
    }
    for (Eigen::Index j = 0; j < sim.cols(); ++j) {
        buf.resize(static_cast<std::size_t>(sim.rows()));
        for (Eigen::Index i = 0; i < sim.rows(); ++i) buf[static_cast<std::size_t>(i)] = sim(i, j);
        r_s[static_cast<std::size_t>(j)] = top_k_mean(buf, kk);
    }
    Matrix out(sim.rows(), sim.cols());
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
        for (Eigen::Index j = 0; j < sim.cols(); ++j) {
            out(i, j) = 2.0 * sim(i, j) - r_t[static_cast<std::size_t>(i)] -
                        r_s[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

Mapping solve_mapping(const Matrix& x, const Matrix& z, const Dictionary& dictionary) {
    check_mapping_inputs(x, z, dictionary);
    const Eigen::MatrixXd xd = gather_rows(x, dictionary, true);
    const Eigen::MatrixXd zd = gather_rows(z, dictionary, false);
    const Eigen::MatrixXd cov = xd.transpose() * zd;
    const auto dec = svd(cov, true);
    Mapping m;
    m.w_source = dec.u * dec.v.transpose();
    m.w_target = Matrix::Identity(x.cols(), x.cols());
    m.underdetermined = static_cast<Eigen::Index>(dictionary.size()) < x.cols();
    return m;
}

Mapping solve_advanced_mapping(const Matrix& x, const Matrix& z, const Dictionary& dictionary) {
    check_mapping_inputs(x, z, dictionary);
    const Eigen::Index d = x.cols();
    const Eigen::MatrixXd xd = gather_rows(x, dictionary, true);
    const Eigen::MatrixXd zd = gather_rows(z, dictionary, false);

    auto whitening = [&](const Eigen::MatrixXd& m) {
        const auto dec = svd(m, false);
        if (dec.s.size() < d || dec.s.minCoeff() <= kDegenerateNorm * dec.s.maxCoeff()) {
            throw ParameterError("dictionary rows are rank-deficient; cannot whiten");
        }
        Eigen::MatrixXd w = dec.v * dec.s.cwiseInverse().asDiagonal() * dec.v.transpose();
        Eigen::MatrixXd w_inv = dec.v * dec.s.asDiagonal() * dec.v.transpose();
        return std::pair{w, w_inv};
    };
    const auto [wx1, wx1_inv] = whitening(xd);
    const auto [wz1, wz1_inv] = whitening(zd);

    const auto dec = svd((xd * wx1).transpose() * (zd * wz1), true);
    const Eigen::MatrixXd& wx2 = dec.u;
    const Eigen::MatrixXd& wz2 = dec.v;
    const Eigen::VectorXd reweight = dec.s.cwiseSqrt();

    Mapping m;
    m.w_source = wx1 * wx2 * reweight.asDiagonal() * (wx2.transpose() * wx1_inv * wx2);
    m.w_target = wz1 * wz2 * reweight.asDiagonal() * (wz2.transpose() * wz1_inv * wz2);
    m.underdetermined = static_cast<Eigen::Index>(dictionary.size()) < d;
    return m;
}

InducedDictionary induce_dictionary(const Matrix& mapped_x, const Matrix& mapped_z,
                                    const AlignmentConfig& config, double keep_prob,
                                    std::uint64_t round) {
    if (mapped_x.cols() != mapped_z.cols()) throw DimensionMismatchError(mapped_x.cols(), mapped_z.cols());
    const Eigen::Index ns = std::min<Eigen::Index>(mapped_x.rows(), static_cast<Eigen::Index>(config.vocab_cutoff));
    const Eigen::Index nt = std::min<Eigen::Index>(mapped_z.rows(), static_cast<Eigen::Index>(config.vocab_cutoff));
    if (ns < 1 || nt < 1) throw ParameterError("cannot induce a dictionary from an empty space");
    const auto k = static_cast<std::size_t>(std::min<Eigen::Index>({config.csls_k, ns, nt}));
    const auto xs = mapped_x.topRows(ns);
    const auto zs = mapped_z.topRows(nt);

    std::vector<double> r_t(static_cast<std::size_t>(ns));
    std::vector<double> r_s(static_cast<std::size_t>(nt));
    std::vector<double> best_fwd(static_cast<std::size_t>(ns));
    std::vector<double> best_bwd(static_cast<std::size_t>(nt));
    std::vector<std::int32_t> fwd(static_cast<std::size_t>(ns));
    std::vector<std::int32_t> bwd(static_cast<std::size_t>(nt));

    const auto tplan = plan_blocks(nt, ns);
    const auto splan = plan_blocks(ns, nt);
    // A single target block is kept for the backward pass.
    Matrix cached_target_block;

    // Pass 1: target neighbourhoods r_S.
    parallel_blocks(tplan.blocks, config.threads, [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * tplan.rows_per_block;
        const Eigen::Index rows = std::min(tplan.rows_per_block, nt - begin);
        Matrix sims = zs.middleRows(begin, rows) * xs.transpose();
        std::vector<double> buf;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double* row = sims.row(r).data();
            buf.assign(row, row + ns);
            const auto j = static_cast<std::size_t>(begin + r);
            best_bwd[j] = *std::max_element(buf.begin(), buf.end());
            r_s[j] = top_k_mean(buf, k);
        }
        if (tplan.blocks == 1) cached_target_block = std::move(sims);
    });

    // Pass 2: source neighbourhoods r_T and forward CSLS argmax.
    parallel_blocks(splan.blocks, config.threads, [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * splan.rows_per_block;
        const Eigen::Index rows = std::min(splan.rows_per_block, ns - begin);
        const Matrix sims = xs.middleRows(begin, rows) * zs.transpose();
        std::vector<double> buf;
        std::vector<double> scores(static_cast<std::size_t>(nt));
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double* row = sims.row(r).data();
            buf.assign(row, row + nt);
            const auto i = static_cast<std::size_t>(begin + r);
            best_fwd[i] = *std::max_element(buf.begin(), buf.end());
            r_t[i] = top_k_mean(buf, k);
            for (std::size_t j = 0; j < static_cast<std::size_t>(nt); ++j) {
                scores[j] = 2.0 * row[j] - r_t[i] - r_s[j];
            }
            RowRng rng(config.seed, round, 0, i);
            fwd[i] = static_cast<std::int32_t>(
                dropout_argmax(scores.data(), scores.size(), keep_prob, rng));
        }
    });

    // Pass 3: backward CSLS argmax.
    parallel_blocks(tplan.blocks, config.threads, [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * tplan.rows_per_block;
        const Eigen::Index rows = std::min(tplan.rows_per_block, nt - begin);
        const Matrix sims = tplan.blocks == 1 ? cached_target_block
                                              : Matrix(zs.middleRows(begin, rows) * xs.transpose());
        std::vector<double> scores(static_cast<std::size_t>(ns));
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double* row = sims.row(r).data();
            const auto j = static_cast<std::size_t>(begin + r);
            for (std::size_t i = 0; i < static_cast<std::size_t>(ns); ++i) {
                scores[i] = 2.0 * row[i] - r_t[i] - r_s[j];
            }
            RowRng rng(config.seed, round, 1, j);
            bwd[j] = static_cast<std::int32_t>(
                dropout_argmax(scores.data(), scores.size(), keep_prob, rng));
        }
    });

    InducedDictionary out;
    out.pairs.reserve(static_cast<std::size_t>(ns + nt));
    for (std::size_t i = 0; i < fwd.size(); ++i) {
        out.pairs.push_back({static_cast<std::int32_t>(i), fwd[i]});
    }
    for (std::size_t j = 0; j < bwd.size(); ++j) {
        out.pairs.push_back({bwd[j], static_cast<std::int32_t>(j)});
    }
    double sum_f = 0;
    for (double v : best_fwd) sum_f += v;
    double sum_b = 0;
    for (double v : best_bwd) sum_b += v;
    out.objective = 0.5 * (sum_f / static_cast<double>(ns) + sum_b / static_cast<double>(nt));
    return out;
}

Dictionary initial_dictionary(const Matrix& x, const Matrix& z, const AlignmentConfig& config) {
    if (x.cols() != z.cols()) throw DimensionMismatchError(x.cols(), z.cols());
    const Eigen::Index n = std::min<Eigen::Index>(
        {x.rows(), z.rows(), static_cast<Eigen::Index>(std::min(config.init_vocab, config.vocab_cutoff))});
    if (n < 2) throw ParameterError("initialization needs at least two words per side");

    auto structure = [&](const Matrix& m) {
        Matrix sim = gram_root(m.topRows(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            std::sort(sim.row(i).data(), sim.row(i).data() + n);
        }
        normalize_in_place(sim, nullptr);
        return sim;
    };
    const Matrix xsim = structure(x);
    const Matrix zsim = structure(z);
    AlignmentConfig init = config;
    init.vocab_cutoff = static_cast<std::size_t>(n);
    return induce_dictionary(xsim, zsim, init, 1.0, 0).pairs;
}

double dictionary_similarity(const Matrix& x, const Matrix& z, const Dictionary& dictionary) {
    if (dictionary.empty()) return 0.0;
    double sum = 0;
    for (const auto& p : dictionary) {
        const auto a = x.row(p.source);
        const auto b = z.row(p.target);
        const double na = a.norm();
        const double nb = b.norm();
        sum += (na > 0 && nb > 0) ? a.dot(b) / (na * nb) : 0.0;
    }
    return sum / static_cast<double>(dictionary.size());
}

namespace {

AlignmentModel self_learning(const Matrix& x, const Matrix& z, const EmbeddingMatrix& source,
                             const EmbeddingMatrix& target, const AlignmentConfig& config,
                             Dictionary dict) {
    AlignmentModel model;

    double keep_prob = config.initial_keep_prob;
    double best = -std::numeric_limits<double>::infinity();
    int last_improvement = 0;
    bool end = false;
    char line[160];
    for (int it = 1;; ++it) {
        if (it - last_improvement > config.stagnation_window) {
            if (keep_prob >= 1.0) end = true;
            keep_prob = std::min(1.0, config.keep_prob_growth * keep_prob);
            last_improvement = it;
        }
        const Mapping mapping = (config.orthogonal || !end) ? solve_mapping(x, z, dict)
                                                            : solve_advanced_mapping(x, z, dict);
        model.w_source = mapping.w_source;
        model.w_target = mapping.w_target;
        if (end) {
            model.converged = true;
            break;
        }
        if (it > config.max_iterations) {
            model.converged = false;
            break;
        }
        const Matrix xw = x * mapping.w_source;
        const Matrix zw = z * mapping.w_target;
        auto induced = induce_dictionary(xw, zw, config, keep_prob, static_cast<std::uint64_t>(it));
        dict = std::move(induced.pairs);
        const double objective = induced.objective;
        if (objective - best >= config.convergence_tol * std::abs(best) || !std::isfinite(best)) {
            last_improvement = it;
            best = objective;
        }
        model.iterations = it;
        std::snprintf(line, sizeof line, "iteration=%d keep_prob=%.4f objective=%.6f dictionary=%zu",
                      it, keep_prob, objective, dict.size());
        model.log.emplace_back(line);
    }
    model.induced_dictionary = dict;

    AlignmentConfig final_config = config;
    final_config.seed = 0;
    const Matrix xw = x * model.w_source;
    const Matrix zw = z * model.w_target;
    Matrix xn = xw;
    Matrix zn = zw;
    if (!config.orthogonal) {
        unit_rows(xn, &source.vocab());
        unit_rows(zn, &target.vocab());
    }
    model.objective = induce_dictionary(xn, zn, final_config, 1.0, 0).objective;
    std::snprintf(line, sizeof line, "converged=%s iterations=%d objective=%.6f",
                  model.converged ? "true" : "false", model.iterations, model.objective);
    model.log.emplace_back(line);
    return model;
}

}  // namespace

AlignmentModel align(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                     const AlignmentConfig& config, const std::optional<Dictionary>& seed_dictionary) {
    config.validate();
    if (source.dim() != target.dim()) throw DimensionMismatchError(source.dim(), target.dim());
    if (source.size() < 2 || target.size() < 2) {
        throw ParameterError("alignment needs at least two words per language");
    }
    const Matrix x = normalize(source).values();
    const Matrix z = normalize(target).values();
    const Dictionary initial = seed_dictionary ? *seed_dictionary : initial_dictionary(x, z, config);
    if (config.restarts == 1) return self_learning(x, z, source, target, config, initial);

    // Independent dropout streams; the winner is picked by the unsupervised
    // objective alone. Ties keep the earlier restart.
    std::optional<AlignmentModel> best;
    std::vector<std::string> summary;
    char line[160];
    for (int r = 0; r < config.restarts; ++r) {
        AlignmentConfig run = config;
        run.seed = config.seed + static_cast<std::uint64_t>(r);
        auto model = self_learning(x, z, source, target, run, initial);
        std::snprintf(line, sizeof line, "restart=%d seed=%llu objective=%.6f converged=%s", r,
                      static_cast<unsigned long long>(run.seed), model.objective,
                      model.converged ? "true" : "false");
        summary.emplace_back(line);
        if (!best || model.objective > best->objective) best = std::move(model);
    }
    auto tail = std::move(best->log.back());
    best->log.pop_back();
    best->log.insert(best->log.end(), summary.begin(), summary.end());
    best->log.push_back(std::move(tail));
    return std::move(*best);
}

EmbeddingMatrix project(const EmbeddingMatrix& m, const Matrix& w) {
    if (w.rows() != static_cast<Eigen::Index>(m.dim())) {
        throw DimensionMismatchError(m.dim(), static_cast<std::size_t>(w.rows()));
    }
    return EmbeddingMatrix(m.vocab(), m.values() * w);
}

double precision_at_1(const EmbeddingMatrix& mapped_source, const EmbeddingMatrix& mapped_target,
                      const Dictionary& gold, Retrieval retrieval, int csls_k, int threads) {
    if (mapped_source.dim() != mapped_target.dim()) {
        throw DimensionMismatchError(mapped_source.dim(), mapped_target.dim());
    }
    if (gold.empty()) throw ParameterError("empty gold dictionary");
    Matrix xs = mapped_source.values();
    Matrix zs = mapped_target.values();
    unit_rows(xs, &mapped_source.vocab());
    unit_rows(zs, &mapped_target.vocab());

    std::unordered_map<std::int32_t, std::vector<std::int32_t>> answers;
    std::vector<std::int32_t> queries;
    for (const auto& p : gold) {
        auto [it, inserted] = answers.try_emplace(p.source);
        if (inserted) queries.push_back(p.source);
        it->second.push_back(p.target);
    }

    const Eigen::Index nt = zs.rows();
    const Eigen::Index ns = xs.rows();
    std::vector<double> r_s(static_cast<std::size_t>(nt), 0.0);
    std::size_t k = 1;
    if (retrieval == Retrieval::csls) {
        k = static_cast<std::size_t>(std::min<Eigen::Index>({csls_k, ns, nt}));
        const auto plan = plan_blocks(nt, ns);
        parallel_blocks(plan.blocks, threads, [&](std::size_t b) {
            const Eigen::Index begin = static_cast<Eigen::Index>(b) * plan.rows_per_block;
            const Eigen::Index rows = std::min(plan.rows_per_block, nt - begin);
            const Matrix sims = zs.middleRows(begin, rows) * xs.transpose();
            std::vector<double> buf;
            for (Eigen::Index r = 0; r < rows; ++r) {
                buf.assign(sims.row(r).data(), sims.row(r).data() + ns);
                r_s[static_cast<std::size_t>(begin + r)] = top_k_mean(buf, k);
            }
        });
    }

    std::vector<char> hit(queries.size(), 0);
    const auto plan = plan_blocks(static_cast<Eigen::Index>(queries.size()), nt);
    parallel_blocks(plan.blocks, threads, [&](std::size_t b) {
        const Eigen::Index begin = static_cast<Eigen::Index>(b) * plan.rows_per_block;
        const Eigen::Index rows =
            std::min(plan.rows_per_block, static_cast<Eigen::Index>(queries.size()) - begin);
        Matrix q(rows, xs.cols());
        for (Eigen::Index r = 0; r < rows; ++r) q.row(r) = xs.row(queries[static_cast<std::size_t>(begin + r)]);
        const Matrix sims = q * zs.transpose();
        std::vector<double> scores(static_cast<std::size_t>(nt));
        std::vector<double> buf;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const double* row = sims.row(r).data();
            double r_t = 0;
            if (retrieval == Retrieval::csls) {
                buf.assign(row, row + nt);
                r_t = top_k_mean(buf, k);
            }
            for (std::size_t j = 0; j < static_cast<std::size_t>(nt); ++j) {
                scores[j] = retrieval == Retrieval::csls ? 2.0 * row[j] - r_t - r_s[j] : row[j];
            }
            const auto best = static_cast<std::int32_t>(argmax_row(scores.data(), scores.size()));
            const auto& ok = answers.at(queries[static_cast<std::size_t>(begin + r)]);
            hit[static_cast<std::size_t>(begin + r)] =
                std::find(ok.begin(), ok.end(), best) != ok.end() ? 1 : 0;
        }
    });
    const auto hits = std::count(hit.begin(), hit.end(), 1);
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace xlex
