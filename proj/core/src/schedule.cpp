#include "randscat/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace randscat {

BandSchedule BandSchedule::polynomial(double c, double gamma, const std::vector<int>& j_list,
                                      int n_k) {
    BandSchedule s;
    s.gamma = gamma;
    s.c = c;
    s.j_list = j_list;
    s.n_k = n_k;
    for (int j : j_list) s.K_list.push_back(c * std::pow(double(j), 2.0 + gamma));
    s.validate();
    return s;
}

BandSchedule BandSchedule::explicit_bands(const std::vector<double>& K_list, double gamma,
                                          int n_k) {
    BandSchedule s;
    s.gamma = gamma;
    s.K_list = K_list;
    s.n_k = n_k;
    s.c = 1e300;
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        s.j_list.push_back(int(i) + 1);
        s.c = std::min(s.c, K_list[i] / std::pow(double(i) + 1.0, 2.0 + gamma));
    }
    s.validate();
    return s;
}

void BandSchedule::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("BandSchedule: gamma must be > 0");
    if (!(c > 0.0)) throw std::invalid_argument("BandSchedule: c must be > 0");
    if (n_k < 8) throw std::invalid_argument("BandSchedule: need at least 8 nodes per band");
    if (K_list.empty() || j_list.size() != K_list.size())
        throw std::invalid_argument("BandSchedule: band lists empty or inconsistent");
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        if (i > 0 && !(K_list[i] > K_list[i - 1]))
            throw std::invalid_argument("BandSchedule: K_j must be strictly increasing");
        if (i > 0 && !(j_list[i] > j_list[i - 1]))
            throw std::invalid_argument("BandSchedule: j_list must be strictly increasing");
        // defining property of P(2+gamma), up to rounding
        if (K_list[i] < c * std::pow(double(j_list[i]), 2.0 + gamma) * (1.0 - 1e-12))
            throw std::invalid_argument("BandSchedule: K_j below the P(2+gamma) growth bound");
    }
}

std::vector<double> BandSchedule::band_nodes(double K) const {
    std::vector<double> nodes(n_k);
    const double dk = K / n_k;
    for (int i = 0; i < n_k; ++i) nodes[i] = K + (i + 0.5) * dk;
    return nodes;
}

}  // namespace randscat
