#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <mfbo/errors.hpp>

namespace mfbo::numerics {

    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    /// Escalation schedule for regularizing near-singular covariances before
    /// factorization: zero jitter first, then initial_jitter growing by
    /// growth_factor for up to max_attempts tries.
    struct JitterPolicy {
        double initial_jitter = 1e-8;
        double growth_factor = 10.0;
        std::size_t max_attempts = 6;
    };

    struct CholeskyResult {
        Matrix lower;
        double applied_jitter = 0.0;
    };

    namespace detail {
        inline void check_symmetric_square(const Matrix& a)
        {
            if (a.rows() != a.cols())
                throw NotSquareError("matrix is not square");
            if (!a.allFinite())
                throw NonFiniteError("matrix has non-finite entries");
            const double scale = 1.0 + a.cwiseAbs().maxCoeff();
            const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
            if (asym > 1e-12 * scale)
                throw InvalidParameterError("matrix is not symmetric");
        }

        inline bool try_llt(const Matrix& a, double jitter, Matrix& lower)
        {
            Matrix shifted = a;
            shifted.diagonal().array() += jitter;
            Eigen::LLT<Matrix> llt(shifted);
            if (llt.info() != Eigen::Success)
                return false;
            lower = llt.matrixL();
            return true;
        }
    } // namespace detail

    /// Cholesky factor of a symmetric matrix, escalating jitter per the policy.
    /// Returns the lower factor of a + applied_jitter*I, with applied_jitter the
    /// smallest policy step that succeeds.
    inline CholeskyResult cholesky(const Matrix& a, const JitterPolicy& policy = {})
    {
        detail::check_symmetric_square(a);
        Matrix lower;
        if (detail::try_llt(a, 0.0, lower))
            return {std::move(lower), 0.0};
        double jitter = policy.initial_jitter;
        for (std::size_t attempt = 0; attempt < policy.max_attempts; ++attempt) {
            if (detail::try_llt(a, jitter, lower))
                return {std::move(lower), jitter};
            jitter *= policy.growth_factor;
        }
        throw NotPositiveDefiniteError("matrix not positive definite after max jitter attempts");
    }

    /// log det(a + jitter*I) via the jittered Cholesky factor.
    inline double log_det_psd(const Matrix& a, const JitterPolicy& policy = {})
    {
        CholeskyResult chol = cholesky(a, policy);
        return 2.0 * chol.lower.diagonal().array().log().sum();
    }

} // namespace mfbo::numerics
