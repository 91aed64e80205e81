#pragma once

#include <utility>
#include <vector>

namespace homodefect {

// Remainder norm channels shared by the finite-difference pipeline and the
// 1D oracle: u_eps/u_star differences over Omega, gradient channels over
// the interior subdomain Omega1.
struct NormsRecord {
    double l2_R = 0.0;             // ||R_eps||_L2(Omega)
    double l2_diff = 0.0;          // ||u_eps - u_star||_L2(Omega)
    double l2_grad_R_1 = 0.0;      // ||grad R_eps||_L2(Omega1)
    double linf_grad_R_1 = 0.0;    // ||grad R_eps||_Linf(Omega1)
    double linf_diff = 0.0;        // ||u_eps - u_star||_Linf(Omega)
    std::vector<std::pair<double, double>> lp_R;  // optional (p, ||R||_Lp(Omega))
};

}  // namespace homodefect
