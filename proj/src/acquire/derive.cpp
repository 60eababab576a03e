#include <algorithm>
#include <cmath>

#include "unicrop/acquire.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::acquire {

namespace {

constexpr double kEviDenominatorFloor = 1e-9;

const TimeSeries& required_input(const std::map<std::string, TimeSeries>& inputs,
                                 const std::string& name) {
    const auto it = inputs.find(name);
    if (it == inputs.end()) {
        throw Error(Errc::missing_input_series, "derivation input '" + name + "' absent");
    }
    return it->second;
}

void check_alignment(const std::vector<const TimeSeries*>& series) {
    for (size_t i = 1; i < series.size(); ++i) {
        const TimeSeries& a = *series[0];
        const TimeSeries& b = *series[i];
        if (a.size() != b.size()) {
            throw Error(Errc::misaligned_dates, "input series lengths differ");
        }
        for (size_t j = 0; j < a.size(); ++j) {
            if (a[j].date != b[j].date) {
                throw Error(Errc::misaligned_dates,
                            "input series dates diverge at " + a[j].date.to_iso());
            }
        }
    }
}

} // namespace

TimeSeries derive_variable(schema::Derivation rule,
                           const std::map<std::string, TimeSeries>& inputs) {
    TimeSeries out;
    switch (rule) {
    case schema::Derivation::evi: {
        const TimeSeries& nir = required_input(inputs, "NIR");
        const TimeSeries& red = required_input(inputs, "RED");
        const TimeSeries& blue = required_input(inputs, "BLUE");
        check_alignment({&nir, &red, &blue});
        out.reserve(nir.size());
        for (size_t i = 0; i < nir.size(); ++i) {
            Cell value;
            if (nir[i].value && red[i].value && blue[i].value) {
                const double denom = *nir[i].value + 6.0 * *red[i].value -
                                     7.5 * *blue[i].value + 1.0;
                if (std::abs(denom) >= kEviDenominatorFloor) {
                    value = 2.5 * (*nir[i].value - *red[i].value) / denom;
                }
            }
            out.push_back({nir[i].date, value});
        }
        return out;
    }
    case schema::Derivation::irrigation: {
        const TimeSeries& pev = required_input(inputs, "PEV");
        const TimeSeries& tp = required_input(inputs, "TP");
        check_alignment({&pev, &tp});
        out.reserve(pev.size());
        for (size_t i = 0; i < pev.size(); ++i) {
            Cell value;
            if (pev[i].value && tp[i].value) {
                value = std::max(0.0, *pev[i].value - *tp[i].value);
            }
            out.push_back({pev[i].date, value});
        }
        return out;
    }
    case schema::Derivation::none:
    case schema::Derivation::custom:
        throw Error(Errc::missing_input_series,
                    std::string("no derivation engine for rule ") + schema::derivation_name(rule));
    }
    return out;
}

} // namespace unicrop::acquire
