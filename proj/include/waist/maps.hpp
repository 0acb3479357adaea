#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "waist/errors.hpp"
#include "waist/sphere.hpp"

namespace waist {

/// Built-in family of continuous test maps S^n -> R^k.
///
///   projection : f_j(x) = x_j
///   perturbed  : f_j(x) = x_j + eta sin(freq x_(j+1 mod n+1))
///   radial     : f_j(x) = x_j (1 + amp (1 - |head|^2)), a radial
///                reparametrization of the projection
struct MapSpec {
    enum class Kind { projection, perturbed, radial };

    Kind kind = Kind::projection;
    int n = 2;
    int k = 1;
    double eta = 0.1;
    double freq = 3.0;
    double amp = 0.5;

    void eval(std::span<const double> x, std::span<double> out) const {
        const std::size_t kk = static_cast<std::size_t>(k);
        switch (kind) {
            case Kind::projection:
                for (std::size_t j = 0; j < kk; ++j) out[j] = x[j];
                return;
            case Kind::perturbed:
                for (std::size_t j = 0; j < kk; ++j)
                    out[j] = x[j] + eta * std::sin(freq * x[(j + 1) % x.size()]);
                return;
            case Kind::radial: {
                double rho = 0.0;
                for (std::size_t j = 0; j < kk; ++j) rho += x[j] * x[j];
                const double scale = 1.0 + amp * (1.0 - rho);
                for (std::size_t j = 0; j < kk; ++j) out[j] = x[j] * scale;
                return;
            }
        }
    }

    std::vector<double> operator()(const UnitVector& x) const {
        std::vector<double> out(static_cast<std::size_t>(k));
        eval(x.coords(), out);
        return out;
    }

    std::string name() const {
        switch (kind) {
            case Kind::projection:
                return "proj";
            case Kind::perturbed:
                return "perturbed:" + format(eta) + ":" + format(freq);
            case Kind::radial:
                return "radial:" + format(amp);
        }
        return "?";
    }

    /// Parses "proj", "perturbed[:eta[:freq]]" or "radial[:amp]".
    static MapSpec parse(const std::string& text, int n, int k) {
        MapSpec m;
        m.n = n;
        m.k = k;
        std::vector<std::string> parts;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t next = text.find(':', pos);
            parts.push_back(text.substr(pos, next == std::string::npos ? next : next - pos));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (parts[0] == "proj" || parts[0] == "projection") {
            m.kind = Kind::projection;
        } else if (parts[0] == "perturbed") {
            m.kind = Kind::perturbed;
            if (parts.size() > 1) m.eta = std::stod(parts[1]);
            if (parts.size() > 2) m.freq = std::stod(parts[2]);
        } else if (parts[0] == "radial") {
            m.kind = Kind::radial;
            if (parts.size() > 1) m.amp = std::stod(parts[1]);
        } else {
            throw OutOfDomain{};
        }
        return m;
    }

    /// The three-map library used by the verification suites.
    static std::vector<MapSpec> library(int n, int k) {
        MapSpec proj{Kind::projection, n, k};
        MapSpec pert{Kind::perturbed, n, k, 0.1, 3.0};
        MapSpec rad{Kind::radial, n, k, 0.1, 3.0, 0.5};
        return {proj, pert, rad};
    }

private:
    static std::string format(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
};

}  // namespace waist
