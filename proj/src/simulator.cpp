#include "auditshare/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace auditshare::sim {

// --- expression mini-language ----------------------------------------------------
//
//   expr   := term ('|' term)*
//   term   := factor ('&' factor)*
//   factor := '~' factor | '(' expr ')' | 'R' digits      (R1 is receiver 0)

namespace {

struct ExprParser {
    std::string_view text;
    size_t pos = 0;
    uint32_t n_receivers;
    std::set<uint32_t>* mentioned;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void parse_error(const std::string& what) {
        fail(Err::EmptyExpression, what + " at offset " + std::to_string(pos));
    }

    // evaluation over the pattern truth table, one flag per pattern
    std::vector<char> parse_expr() {
        std::vector<char> acc = parse_term();
        while (eat('|')) {
            std::vector<char> rhs = parse_term();
            for (size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] || rhs[i];
        }
        return acc;
    }

    std::vector<char> parse_term() {
        std::vector<char> acc = parse_factor();
        while (eat('&')) {
            std::vector<char> rhs = parse_factor();
            for (size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] && rhs[i];
        }
        return acc;
    }

    std::vector<char> parse_factor() {
        if (eat('~')) {
            std::vector<char> inner = parse_factor();
            for (auto& f : inner) f = !f;
            return inner;
        }
        if (eat('(')) {
            std::vector<char> inner = parse_expr();
            if (!eat(')')) parse_error("missing ')'");
            return inner;
        }
        skip_ws();
        if (pos < text.size() && (text[pos] == 'R' || text[pos] == 'r')) {
            ++pos;
            size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (start == pos) parse_error("expected receiver number after 'R'");
            unsigned long k = std::stoul(std::string(text.substr(start, pos - start)));
            if (k < 1 || k > n_receivers)
                fail(Err::DomainError,
                     "expression references unknown receiver R" + std::to_string(k));
            uint32_t bit = 1u << (k - 1);
            if (mentioned) mentioned->insert(uint32_t(k - 1));
            std::vector<char> out(size_t(1) << n_receivers);
            for (size_t p = 0; p < out.size(); ++p) out[p] = (p & bit) != 0;
            return out;
        }
        parse_error("expected 'R<k>', '~' or '('");
    }
};

std::vector<char> run_parser(const std::string& expr, uint32_t n_receivers,
                             std::set<uint32_t>* mentioned) {
    if (n_receivers < 1 || n_receivers > 20)
        fail(Err::DomainError, "expressions need 1..20 receivers");
    ExprParser p{expr, 0, n_receivers, mentioned};
    std::vector<char> acc = p.parse_expr();
    p.skip_ws();
    if (p.pos != expr.size()) p.parse_error("trailing input");
    return acc;
}

}  // namespace

std::vector<char> eval_expression(const std::string& expr, uint32_t n_receivers) {
    return run_parser(expr, n_receivers, nullptr);
}

std::vector<uint32_t> mentioned_receivers(const std::string& expr, uint32_t n_receivers) {
    std::set<uint32_t> mentioned;
    run_parser(expr, n_receivers, &mentioned);
    return std::vector<uint32_t>(mentioned.begin(), mentioned.end());
}

std::string LeakScenario::label() const {
    switch (kind) {
        case Kind::GuiltyReceiver: return "receiver(R" + std::to_string(receiver + 1) + ")";
        case Kind::GuiltySender: return "sender";
        case Kind::Collusion: return "collude(" + expression + ")";
    }
    return "?";
}

LeakScenario LeakScenario::parse(const std::string& text) {
    LeakScenario s;
    if (text == "receiver" || text.rfind("receiver:", 0) == 0) {
        s.kind = Kind::GuiltyReceiver;
        if (auto pos = text.find(':'); pos != std::string::npos) {
            unsigned long k = std::stoul(text.substr(pos + 1));
            if (k < 1) fail(Err::ConfigError, "receiver scenarios are 1-indexed");
            s.receiver = uint32_t(k - 1);
        }
        return s;
    }
    if (text == "sender") {
        s.kind = Kind::GuiltySender;
        return s;
    }
    if (text.rfind("collude:", 0) == 0) {
        s.kind = Kind::Collusion;
        s.expression = text.substr(8);
        if (s.expression.empty()) fail(Err::ConfigError, "collude scenario needs an expression");
        return s;
    }
    fail(Err::ConfigError, "unknown scenario: " + text);
}

ConfirmedAllocation simulate_allocation(uint64_t n_fakes, uint32_t n_receivers, uint64_t seed) {
    if (n_fakes < 2 || n_fakes % 2 != 0)
        fail(Err::DomainError, "fake count must be even and >= 2");
    if (n_receivers < 1 || n_receivers > 20) fail(Err::DomainError, "1..20 receivers");

    ConfirmedAllocation alloc;
    alloc.n_receivers = n_receivers;
    for (uint32_t r = 0; r < n_receivers; ++r)
        alloc.receiver_ids.push_back("R" + std::to_string(r + 1));
    alloc.patterns.resize(n_fakes);

    DetRng rng(seed, "sim-allocation");
    uint32_t mask = uint32_t((uint64_t(1) << n_receivers) - 1);
    for (uint64_t p = 0; p < n_fakes / 2; ++p) {
        uint32_t r = 0;
        for (uint32_t i = 0; i < n_receivers; ++i) r |= uint32_t(rng.bit()) << i;
        alloc.patterns[2 * p] = r;
        alloc.patterns[2 * p + 1] = ~r & mask;
    }
    return alloc;
}

ConfirmedAllocation simulate_allocation_crypto(uint64_t n_fakes, uint32_t n_receivers,
                                               uint64_t seed) {
    if (n_fakes < 2 || n_fakes % 2 != 0)
        fail(Err::DomainError, "fake count must be even and >= 2");
    PIIKeySpec spec;
    spec.attribute_names = {"id"};
    std::vector<DataObject> fakes =
        generate_fake_objects({"id"}, spec, n_fakes, seed, {}, {ColumnStyle::Digits});

    DetRng notary_rng(seed, "crypto-notary");
    Notary notary(NotaryConfig{}, notary_rng);

    ConfirmedAllocation alloc;
    alloc.n_receivers = n_receivers;
    alloc.patterns.assign(n_fakes, 0);
    for (uint32_t i = 0; i < n_fakes; ++i) {
        alloc.index_by_id.emplace(fakes[i].object_id, i);
        alloc.object_ids.push_back(fakes[i].object_id);
    }
    for (uint32_t r = 0; r < n_receivers; ++r) {
        SessionParams params;
        params.receiver_id = "R" + std::to_string(r + 1);
        params.receiver_index = r;
        params.master_seed = mix_seed(seed, 7000 + r);
        SessionOutcome outcome = run_session({}, fakes, notary, params);
        if (!outcome.ok())
            fail(outcome.failure->code, "crypto allocation session failed: " +
                                            outcome.failure->message);
        AllocationRecord rec =
            extract_allocation(*outcome.sender, outcome.receiver->choices);
        for (const auto& id : rec.recv_set) alloc.patterns[alloc.index_by_id.at(id)] |= 1u << r;
        alloc.receiver_ids.push_back(params.receiver_id);
    }
    return alloc;
}

LeakedSet make_leak(const LeakScenario& scenario, const ConfirmedAllocation& alloc,
                    uint64_t seed) {
    if (!(scenario.leak_fraction > 0.0 && scenario.leak_fraction <= 1.0))
        fail(Err::DomainError, "leak fraction must be in (0, 1]");

    std::vector<uint32_t> domain;
    switch (scenario.kind) {
        case LeakScenario::Kind::GuiltyReceiver: {
            if (scenario.receiver >= alloc.n_receivers)
                fail(Err::DomainError, "guilty receiver index out of range");
            uint32_t bit = 1u << scenario.receiver;
            for (uint32_t i = 0; i < alloc.patterns.size(); ++i)
                if (alloc.patterns[i] & bit) domain.push_back(i);
            break;
        }
        case LeakScenario::Kind::GuiltySender: {
            domain.resize(alloc.patterns.size());
            for (uint32_t i = 0; i < domain.size(); ++i) domain[i] = i;
            break;
        }
        case LeakScenario::Kind::Collusion: {
            std::vector<char> accept = eval_expression(scenario.expression, alloc.n_receivers);
            for (uint32_t i = 0; i < alloc.patterns.size(); ++i)
                if (accept[alloc.patterns[i]]) domain.push_back(i);
            break;
        }
    }
    if (domain.empty()) fail(Err::EmptyExpression, "scenario knowledge domain is empty");

    uint64_t count = uint64_t(std::ceil(scenario.leak_fraction * double(domain.size())));
    count = std::min<uint64_t>(std::max<uint64_t>(count, 1), domain.size());

    DetRng rng(seed, "sim-leak");
    LeakedSet leak;
    leak.indices.reserve(count);
    // partial Fisher-Yates: first `count` slots become the sample
    for (uint64_t i = 0; i < count; ++i) {
        uint64_t j = i + rng.below(domain.size() - i);
        std::swap(domain[i], domain[j]);
        leak.indices.push_back(domain[i]);
    }
    return leak;
}

namespace {

struct TrialStats {
    std::vector<double> errors;
    uint32_t full_count = 0;
};

double trial_error(const LeakScenario& scenario, const ConfirmedAllocation& alloc,
                   const LeakedSet& leaked, double alpha, bool* full_id) {
    switch (scenario.kind) {
        case LeakScenario::Kind::GuiltyReceiver: {
            NonColludingReport rep = identify_noncolluding(leaked, alloc);
            *full_id = rep.receiver_guilty(scenario.receiver);
            if (!*full_id) return 1.0;
            return std::max(kMinErrorRate, 1.0 - rep.receiver_detect_prob[scenario.receiver]);
        }
        case LeakScenario::Kind::GuiltySender: {
            NonColludingReport rep = identify_noncolluding(leaked, alloc);
            *full_id = rep.sender_guilty;
            if (!*full_id) return 1.0;
            return std::max(kMinErrorRate, 1.0 - rep.sender_detect_prob);
        }
        case LeakScenario::Kind::Collusion: {
            IdentificationReport rep = identify_colluding(leaked, alloc, alpha);
            std::vector<uint32_t> truth =
                mentioned_receivers(scenario.expression, alloc.n_receivers);
            bool all = true;
            std::vector<double> ps;
            for (uint32_t r : truth) {
                if (!rep.is_flagged(r)) {
                    all = false;
                    break;
                }
                ps.push_back(rep.pvalues[r]);
            }
            *full_id = all;
            if (!all) return 1.0;
            // confidence over the true leaker set; falsely co-flagged
            // honest receivers surface via the soundness counters instead
            return std::max(kMinErrorRate, 1.0 - accuracy_from_pvalues(ps));
        }
    }
    return 1.0;
}

}  // namespace

SweepResult sweep(const std::vector<LeakScenario>& scenarios,
                  const std::vector<double>& fractions, uint32_t trials, uint64_t n_fakes,
                  uint32_t n_receivers, uint64_t seed, double alpha) {
    if (trials < 1) fail(Err::DomainError, "need at least one trial");
    SweepResult result;
    for (size_t s = 0; s < scenarios.size(); ++s) {
        for (size_t f = 0; f < fractions.size(); ++f) {
            LeakScenario scenario = scenarios[s];
            scenario.leak_fraction = fractions[f];
            TrialStats stats;
            stats.errors.reserve(trials);
            for (uint32_t t = 0; t < trials; ++t) {
                uint64_t trial_seed = mix_seed(seed, (s * 1000003 + f) * 1000003 + t);
                ConfirmedAllocation alloc =
                    simulate_allocation(n_fakes, n_receivers, mix_seed(trial_seed, 1));
                LeakedSet leaked = make_leak(scenario, alloc, mix_seed(trial_seed, 2));
                bool full = false;
                double err = trial_error(scenario, alloc, leaked, alpha, &full);
                stats.errors.push_back(err);
                if (full) ++stats.full_count;
            }
            SweepRow row;
            row.scenario = scenario.label();
            row.fraction = fractions[f];
            row.trials = trials;
            row.full_id_count = stats.full_count;
            double sum = 0.0;
            for (double e : stats.errors) sum += e;
            row.mean_error = sum / trials;
            double var = 0.0;
            for (double e : stats.errors) var += (e - row.mean_error) * (e - row.mean_error);
            row.stderr_error = trials > 1 ? std::sqrt(var / (trials - 1.0) / trials) : 0.0;
            std::vector<double> sorted = stats.errors;
            std::sort(sorted.begin(), sorted.end());
            row.median_error = trials % 2 == 1
                                   ? sorted[trials / 2]
                                   : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

std::string SweepResult::to_csv() const {
    std::string out = "scenario,fraction,trials,mean_error,full_id_rate\n";
    char buf[256];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%s,%g,%u,%.6e,%.4f\n", row.scenario.c_str(),
                      row.fraction, row.trials, row.mean_error, row.full_id_rate());
        out += buf;
    }
    return out;
}

}  // namespace auditshare::sim
