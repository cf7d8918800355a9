#include "core/sindy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

namespace dsy {

namespace {

using nlohmann::json;

std::string format_coeff(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, std::abs(v));
    return buf;
}

// Rows of `src` flagged in `mask`, packed densely.
Matrix masked_rows(const Matrix &src, const std::vector<char> &mask, int count) {
    Matrix out(count, src.cols());
    int r = 0;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i])
            out.row(r++) = src.row(static_cast<Eigen::Index>(i));
    return out;
}

} // namespace

void StlsConfig::validate() const {
    if (threshold < 0.0)
        throw ConfigError("STLS threshold must be nonnegative");
    if (max_iterations < 1)
        throw ConfigError("STLS max_iterations must be >= 1");
    if (rcond < 0.0)
        throw ConfigError("STLS rcond must be nonnegative");
}

SparseModel stls_fit(const DesignMatrix &design, const Matrix &derivatives,
                     const StlsConfig &config) {
    config.validate();
    if (derivatives.rows() != design.columns.rows())
        throw ConfigError("derivative rows do not match the design matrix");
    const int q = design.cols();
    const int mv = design.valid_rows();
    if (mv < q)
        throw ConfigError("fewer valid rows than library columns");

    Matrix theta = masked_rows(design.columns, design.row_mask, mv);
    Matrix target = masked_rows(derivatives, design.row_mask, mv);
    const int n = static_cast<int>(target.cols());

    Eigen::VectorXd scale = Eigen::VectorXd::Ones(q);
    if (config.normalize_columns) {
        for (int j = 0; j < q; ++j) {
            const double nrm = theta.col(j).norm();
            if (nrm > 0.0) {
                scale[j] = nrm;
                theta.col(j) /= nrm;
            }
        }
    }

    SparseModel model;
    model.coefficients = Matrix::Zero(q, n);
    model.labels = design.labels;
    model.vars = design.vars;
    model.slot_delays = design.slot_delays;
    model.base_names = design.base_names;

    for (int i = 0; i < n; ++i) {
        std::vector<int> support(q);
        for (int j = 0; j < q; ++j)
            support[j] = j;

        Eigen::VectorXd xi = Eigen::VectorXd::Zero(q);
        for (int iter = 0; iter < config.max_iterations && !support.empty(); ++iter) {
            Matrix sub(mv, support.size());
            for (size_t j = 0; j < support.size(); ++j)
                sub.col(static_cast<Eigen::Index>(j)) = theta.col(support[j]);
            Eigen::ColPivHouseholderQR<Matrix> qr(sub);
            qr.setThreshold(config.rcond);
            const Eigen::VectorXd sol = qr.solve(target.col(i));

            xi.setZero();
            std::vector<int> next;
            for (size_t j = 0; j < support.size(); ++j) {
                const double coeff = sol[static_cast<Eigen::Index>(j)] / scale[support[j]];
                if (std::abs(coeff) >= config.threshold) {
                    xi[support[j]] = coeff;
                    next.push_back(support[j]);
                }
            }
            if (next.size() == support.size())
                break;
            support = std::move(next);
            if (support.empty())
                xi.setZero();
        }
        if (support.empty() && target.col(i).norm() > 0.0)
            model.degenerate = true;
        model.coefficients.col(i) = xi;
    }

    if (config.normalize_columns)
        for (int j = 0; j < q; ++j)
            theta.col(j) *= scale[j];
    model.fit_error = (target - theta * model.coefficients).norm();
    return model;
}

double reconstruction_error(const SparseModel &model, const DesignMatrix &design,
                            const Matrix &derivatives) {
    if (model.n_terms() != design.cols())
        throw ConfigError("model terms do not match the design matrix");
    if (derivatives.rows() != design.columns.rows())
        throw ConfigError("derivative rows do not match the design matrix");
    const int mv = design.valid_rows();
    const Matrix theta = masked_rows(design.columns, design.row_mask, mv);
    const Matrix target = masked_rows(derivatives, design.row_mask, mv);
    return (target - theta * model.coefficients).norm();
}

DelaySystem model_to_system(const SparseModel &model) {
    // Sorted unique delays define the DelaySystem slots.
    std::vector<double> sorted = model.slot_delays;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> slot_to_sorted(model.slot_delays.size());
    for (size_t s = 0; s < model.slot_delays.size(); ++s)
        slot_to_sorted[s] = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(), model.slot_delays[s]) -
            sorted.begin());

    for (const auto &label : model.labels)
        if (label.kind != TermLabel::Kind::Monomial &&
            (label.trig_var < 0 || label.trig_var >= model.dim()))
            throw ConfigError("trig term references a missing variable");

    const Matrix coeffs = model.coefficients;
    const auto labels = model.labels;
    const auto vars = model.vars;
    const auto slots = slot_to_sorted;
    const int n = model.dim();

    DelaySystem sys;
    sys.dim = n;
    sys.delays = sorted;
    sys.params = model.params;
    sys.rhs = [coeffs, labels, vars, slots, n](const Vector &x,
                                               const std::vector<Vector> &xd,
                                               const ParamMap &) {
        auto var_value = [&](int idx) {
            const AugVar &v = vars[idx];
            switch (v.kind) {
            case AugVar::Kind::Current:
                return x[v.var];
            case AugVar::Kind::Delayed:
                return xd[slots[v.slot]][v.var];
            case AugVar::Kind::Hill: {
                const double base = xd[slots[v.slot]][v.var];
                return 1.0 / (1.0 + std::pow(base, v.alpha));
            }
            }
            return 0.0;
        };
        Vector out = Vector::Zero(n);
        for (size_t t = 0; t < labels.size(); ++t) {
            double term = 1.0;
            const auto &label = labels[t];
            if (label.kind == TermLabel::Kind::Sin)
                term = std::sin(x[label.trig_var]);
            else if (label.kind == TermLabel::Kind::Cos)
                term = std::cos(x[label.trig_var]);
            else
                for (const auto &[v, p] : label.powers)
                    for (int e = 0; e < p; ++e)
                        term *= var_value(v);
            for (int i = 0; i < n; ++i) {
                const double c = coeffs(static_cast<Eigen::Index>(t), i);
                if (c != 0.0)
                    out[i] += c * term;
            }
        }
        return out;
    };
    return sys;
}

std::string format_model(const SparseModel &model, int decimals) {
    std::ostringstream out;
    for (int i = 0; i < model.dim(); ++i) {
        const std::string name = model.var_names.empty()
                                     ? "x" + std::to_string(i + 1)
                                     : model.var_names[i];
        out << name << "'(t) = ";
        bool first = true;
        for (int t = 0; t < model.n_terms(); ++t) {
            const double c = model.coefficients(t, i);
            if (c == 0.0)
                continue;
            if (first) {
                if (c < 0.0)
                    out << "-";
            } else {
                out << (c < 0.0 ? " - " : " + ");
            }
            out << format_coeff(c, decimals);
            const std::string term = term_name(model.labels[t], model.vars,
                                               model.slot_delays, model.base_names);
            if (term != "1")
                out << "·" << term;
            first = false;
        }
        if (first)
            out << "0";
        if (i + 1 < model.dim())
            out << "\n";
    }
    return out.str();
}

namespace {

json label_to_json(const TermLabel &label) {
    json j;
    switch (label.kind) {
    case TermLabel::Kind::Monomial: {
        j["kind"] = "monomial";
        json powers = json::array();
        for (const auto &[v, p] : label.powers)
            powers.push_back({v, p});
        j["powers"] = powers;
        break;
    }
    case TermLabel::Kind::Sin:
        j["kind"] = "sin";
        j["var"] = label.trig_var;
        break;
    case TermLabel::Kind::Cos:
        j["kind"] = "cos";
        j["var"] = label.trig_var;
        break;
    }
    return j;
}

TermLabel label_from_json(const json &j) {
    TermLabel label;
    const std::string kind = j.at("kind");
    if (kind == "monomial") {
        label.kind = TermLabel::Kind::Monomial;
        for (const auto &pw : j.at("powers"))
            label.powers.emplace_back(pw.at(0).get<int>(), pw.at(1).get<int>());
    } else if (kind == "sin" || kind == "cos") {
        label.kind = kind == "sin" ? TermLabel::Kind::Sin : TermLabel::Kind::Cos;
        label.trig_var = j.at("var");
    } else {
        throw ConfigError("unknown term kind '" + kind + "'");
    }
    return label;
}

json var_to_json(const AugVar &v) {
    json j;
    switch (v.kind) {
    case AugVar::Kind::Current:
        j["kind"] = "current";
        break;
    case AugVar::Kind::Delayed:
        j["kind"] = "delayed";
        j["slot"] = v.slot;
        break;
    case AugVar::Kind::Hill:
        j["kind"] = "hill";
        j["slot"] = v.slot;
        j["alpha"] = v.alpha;
        break;
    }
    j["var"] = v.var;
    return j;
}

AugVar var_from_json(const json &j) {
    AugVar v;
    const std::string kind = j.at("kind");
    v.var = j.at("var");
    if (kind == "current") {
        v.kind = AugVar::Kind::Current;
    } else if (kind == "delayed") {
        v.kind = AugVar::Kind::Delayed;
        v.slot = j.at("slot");
    } else if (kind == "hill") {
        v.kind = AugVar::Kind::Hill;
        v.slot = j.at("slot");
        v.alpha = j.at("alpha");
    } else {
        throw ConfigError("unknown variable kind '" + kind + "'");
    }
    return v;
}

} // namespace

std::string model_to_json(const SparseModel &model) {
    json j;
    j["labels"] = json::array();
    for (const auto &label : model.labels)
        j["labels"].push_back(label_to_json(label));
    j["vars"] = json::array();
    for (const auto &v : model.vars)
        j["vars"].push_back(var_to_json(v));
    j["slot_delays"] = model.slot_delays;
    j["base_names"] = model.base_names;
    j["var_names"] = model.var_names;
    j["coefficients"] = json::array();
    for (int t = 0; t < model.n_terms(); ++t) {
        json row = json::array();
        for (int i = 0; i < model.dim(); ++i)
            row.push_back(model.coefficients(t, i));
        j["coefficients"].push_back(row);
    }
    j["params"] = model.params;
    j["fit_error"] = model.fit_error;
    j["degenerate"] = model.degenerate;
    return j.dump(2);
}

SparseModel model_from_json(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid model JSON: ") + e.what());
    }
    SparseModel model;
    try {
        for (const auto &l : j.at("labels"))
            model.labels.push_back(label_from_json(l));
        for (const auto &v : j.at("vars"))
            model.vars.push_back(var_from_json(v));
        model.slot_delays = j.at("slot_delays").get<std::vector<double>>();
        model.base_names = j.at("base_names").get<std::vector<std::string>>();
        model.var_names = j.at("var_names").get<std::vector<std::string>>();
        const auto &rows = j.at("coefficients");
        const auto q = static_cast<Eigen::Index>(rows.size());
        const auto n = q ? static_cast<Eigen::Index>(rows[0].size()) : 0;
        model.coefficients.resize(q, n);
        for (Eigen::Index t = 0; t < q; ++t)
            for (Eigen::Index i = 0; i < n; ++i)
                model.coefficients(t, i) = rows[t][i].get<double>();
        model.params = j.at("params").get<ParamMap>();
        model.fit_error = j.at("fit_error");
        model.degenerate = j.at("degenerate");
    } catch (const json::exception &e) {
        throw ConfigError(std::string("model JSON missing fields: ") + e.what());
    }
    return model;
}

} // namespace dsy
