#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapsolve {

// All tunable constants. Two profiles: "paper" uses the published constants
// (most of them are formulas in n), "desk" uses flat values small enough that
// the algorithms' preconditions can be met on graphs with n <= 1e4.
struct SolverConfig {
    std::string profile = "desk";

    // solver
    double epsilon = 1e-8;
    double p = std::sqrt(10.0) / 3.0 - 1.0 / 3.0;
    double sample_delta = 0.1;
    double richardson_iters_coeff = 1;
    double size_check_coeff = 1600;
    double c_s = 4;
    double eta_coeff = 8;
    double eta_slack = 0.05;
    double eta_override = 2;  // > 0 replaces the eta formula
    double kappa_env_coeff = 0;  // 0: kappa(m) is the measured ||tau||_p^p
    double base_case_edge_threshold = 512;
    double base_case_tol = 1e-14;
    double inner_error_override = 0;  // > 0 replaces 1/(1600 c_s^2 ln^2 n)
    double richardson_step = 0.5;
    double agd_kappa_override = 0;
    double max_levels = 1;  // calls at this depth use the base case
    std::uint64_t seed = 1;

    // spectral subgraph
    double akpw_k_override = 0;  // 0: m / ln^2 n
    double akpw_beta_override = 0.3;
    double akpw_delta_override = 0;
    double akpw_sigma_override = 0;
    std::string tau_mode = "tightened";  // or "paper"
    double augment_ps_k = 1;  // k handed to path_sparsify inside AugmentTree

    // path sparsify
    double c_unif = 2;
    double pps_d_divisor = 2;
    double c_split = 2;
    double c_bip = 8;
    double density_floor = 16;
    double c_kp = 1;
    double kp_log_power = 0;
    double cut_fraction = 0.125;
    double phi_target = 0.05;
    double max_retries = 64;
    double expander_max_depth = 40;
    double expander_dense_limit = 2500;
    double c_iter = 4;
    double ps_budget_coeff = 8;

    // ultrasparsify
    double us_dense_cap = 200;
    double bss_bisect_tol = 1e-10;

    bool paper_profile() const { return profile == "paper"; }

    static SolverConfig desk() { return SolverConfig{}; }
    static SolverConfig paper() {
        SolverConfig c;
        c.profile = "paper";
        c.eta_override = 0;
        c.kappa_env_coeff = 1;
        c.richardson_iters_coeff = 200;
        c.max_levels = 40;
        c.pps_d_divisor = 10;
        c.kp_log_power = 3;
        c.c_unif = 32;
        c.akpw_beta_override = 0;
        c.tau_mode = "paper";
        c.richardson_step = 0.1;
        return c;
    }

    // Profile-dependent constants that grow with n.
    double eff_c_split(int n) const { return paper_profile() ? 20.0 * std::log(4.0 * n) : c_split; }
    double eff_c_bip(int n) const { return paper_profile() ? 40.0 * std::log(2.0 * n) : c_bip; }
    double eff_density_floor(int n) const {
        double l = std::log(2.0 * n);
        return paper_profile() ? 2000.0 * l * l : density_floor;
    }
    double eff_phi_target(long long m) const {
        if (!paper_profile()) return phi_target;
        double l = std::log(std::max<long long>(m, 3));
        return 1.0 / (l * l * l);
    }
    double k_partial(double k, int n) const {
        double l = std::log(std::max(n, 2));
        return std::max(1.0, k * c_kp * std::pow(l, kp_log_power));
    }
    double inner_error(int n) const {
        if (inner_error_override > 0) return inner_error_override;
        double l = std::log(std::max(n, 3));
        return 1.0 / (1600.0 * c_s * c_s * l * l);
    }

    struct Entry {
        std::string key;
        double* num;
        std::string* str;
        const char* paper;  // paper default, as written there
    };

    std::vector<Entry> entries() {
        return {
            {"profile", nullptr, &profile, "paper"},
            {"epsilon", &epsilon, nullptr, "input"},
            {"p", &p, nullptr, "sqrt(10)/3 - 1/3"},
            {"sample_delta", &sample_delta, nullptr, "1/10"},
            {"richardson_iters_coeff", &richardson_iters_coeff, nullptr, "200"},
            {"size_check_coeff", &size_check_coeff, nullptr, "1600"},
            {"c_s", &c_s, nullptr, "unspecified constant"},
            {"eta_coeff", &eta_coeff, nullptr, "sufficiently large constant"},
            {"eta_slack", &eta_slack, nullptr, "any positive constant"},
            {"eta_override", &eta_override, nullptr, "none"},
            {"kappa_env_coeff", &kappa_env_coeff, nullptr, "O(1)"},
            {"base_case_edge_threshold", &base_case_edge_threshold, nullptr, "none"},
            {"base_case_tol", &base_case_tol, nullptr, "none"},
            {"inner_error_override", &inner_error_override, nullptr, "1/(1600 c_s^2 ln^2 n)"},
            {"richardson_step", &richardson_step, nullptr, "1/10"},
            {"agd_kappa_override", &agd_kappa_override, nullptr, "eta"},
            {"max_levels", &max_levels, nullptr, "none"},
            {"akpw_k_override", &akpw_k_override, nullptr, "m/ln^2 n"},
            {"akpw_beta_override", &akpw_beta_override, nullptr, "(49 ln^2 k)^(-p/(1-p))"},
            {"akpw_delta_override", &akpw_delta_override, nullptr, "48 sigma ln k / beta"},
            {"akpw_sigma_override", &akpw_sigma_override, nullptr, "ceil(log_{1/beta} k)"},
            {"tau_mode", nullptr, &tau_mode, "paper"},
            {"augment_ps_k", &augment_ps_k, nullptr, "O(log^5 n)"},
            {"c_unif", &c_unif, nullptr, "Theta(1), unspecified"},
            {"pps_d_divisor", &pps_d_divisor, nullptr, "10"},
            {"c_split", &c_split, nullptr, "20 ln(4n)"},
            {"c_bip", &c_bip, nullptr, "40 ln(2n)"},
            {"density_floor", &density_floor, nullptr, "2000 ln^2(2n)"},
            {"c_kp", &c_kp, nullptr, "Theta(1), unspecified"},
            {"kp_log_power", &kp_log_power, nullptr, "3"},
            {"cut_fraction", &cut_fraction, nullptr, "1/8"},
            {"phi_target", &phi_target, nullptr, "Omega(1/ln^3 m)"},
            {"max_retries", &max_retries, nullptr, "unbounded"},
            {"expander_max_depth", &expander_max_depth, nullptr, "none"},
            {"expander_dense_limit", &expander_dense_limit, nullptr, "none"},
            {"c_iter", &c_iter, nullptr, "O(1)"},
            {"ps_budget_coeff", &ps_budget_coeff, nullptr, "O(1)"},
            {"us_dense_cap", &us_dense_cap, nullptr, "none"},
            {"bss_bisect_tol", &bss_bisect_tol, nullptr, "none"},
        };
    }

    void set(const std::string& key, const std::string& value) {
        if (key == "seed") {
            seed = std::stoull(value);
            return;
        }
        if (key == "profile") {
            if (value != "paper" && value != "desk") throw std::invalid_argument("profile must be paper or desk");
            SolverConfig base = value == "paper" ? paper() : desk();
            base.epsilon = epsilon;
            base.seed = seed;
            *this = base;
            return;
        }
        for (auto& e : entries()) {
            if (e.key != key) continue;
            if (e.str) {
                if (key == "tau_mode" && value != "paper" && value != "tightened")
                    throw std::invalid_argument("tau_mode must be paper or tightened");
                *e.str = value;
            } else {
                std::size_t pos = 0;
                double v = std::stod(value, &pos);
                if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument("bad value for " + key);
                *e.num = v;
            }
            return;
        }
        throw std::invalid_argument("unknown config key: " + key);
    }

    // "key=value"
    void set_assignment(const std::string& kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected KEY=VAL, got " + kv);
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }

    // One KEY=VAL per line; '#' starts a comment.
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config " + path);
        std::string line;
        while (std::getline(in, line)) {
            auto h = line.find('#');
            if (h != std::string::npos) line.resize(h);
            line = trim(line);
            if (!line.empty()) set_assignment(line);
        }
    }

    void validate() const {
        if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0,1)");
        if (!(p > 0.5 && p < 1)) throw std::invalid_argument("p must lie in (1/2,1)");
        if (!(sample_delta > 0 && sample_delta < 1)) throw std::invalid_argument("sample_delta must lie in (0,1)");
        if (richardson_iters_coeff <= 0 || size_check_coeff <= 0 || c_s <= 0 || eta_coeff <= 0)
            throw std::invalid_argument("coefficients must be positive");
    }

   private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
};

}  // namespace lapsolve
