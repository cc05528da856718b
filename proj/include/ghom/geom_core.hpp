#ifndef GHOM_GEOM_CORE_HPP
#define GHOM_GEOM_CORE_HPP

// Domain types and deterministic transforms shared by all solvers.
//
// Frame conventions:
//   * A camera rotation R (world -> camera) factors as R = A * Y where A is
//     the IMU attitude (pitch and roll) and Y a rotation about the world
//     y-axis (gravity / ground-plane normal).
//   * The rectified ray of pixel x is y = A^T K^-1 x with K = diag(f, f, 1).
//   * Rectified rays of ground points obey y2 ~ Hy y1 where
//         Hy = Ry(yaw) + t' * (0, 1, 0)^T,
//     i.e. the restricted homography with rows (h1, h3, h2), (0, h4, 0),
//     (-h2, h5, h1).

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "ghom/error.hpp"

namespace ghom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;

// General 3x3 homography (pixel space or a general Hy).
using FullHomography = Mat3;

inline Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

inline Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

inline Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

inline bool is_rotation(const Mat3 &r, double tol) {
    if (!r.allFinite()) return false;
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

// Nearest rotation in the Frobenius sense.
inline Mat3 orthonormalize(const Mat3 &m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 u = svd.matrixU();
        u.col(2) *= -1.0;
        r = u * svd.matrixV().transpose();
    }
    return r;
}

struct PixelPoint {
    double u = 0.0;
    double v = 0.0;

    Vec3 homogeneous() const { return {u, v, 1.0}; }
    bool finite() const { return std::isfinite(u) && std::isfinite(v); }
    bool operator==(const PixelPoint &) const = default;
};

// Pitch/roll attitude reported by the IMU for one view.
class ImuAttitude {
  public:
    ImuAttitude() : r_(Mat3::Identity()) {}

    // Throws InvalidInput when `r` is not a rotation within `tol`.
    explicit ImuAttitude(const Mat3 &r, double tol = 1e-12) : r_(r) {
        if (!is_rotation(r, tol)) throw Error(ErrorKind::InvalidInput, "attitude is not a rotation matrix");
    }

    // A = Rx(pitch) * Rz(roll).
    static ImuAttitude from_pitch_roll(double pitch, double roll) {
        ImuAttitude a;
        a.r_ = rot_x(pitch) * rot_z(roll);
        return a;
    }

    const Mat3 &matrix() const { return r_; }

    // Direction of the world y-axis seen from this camera.
    Vec3 gravity_axis() const { return r_.col(1); }

    bool operator==(const ImuAttitude &o) const { return r_ == o.r_; }

  private:
    Mat3 r_;
};

class Intrinsics {
  public:
    Intrinsics() = default;
    explicit Intrinsics(double focal) : f_(focal) {
        if (!std::isfinite(focal) || focal <= 0.0)
            throw Error(ErrorKind::InvalidInput, "focal length must be finite and positive");
    }

    double focal() const { return f_; }
    // w = 1/f, the inverse scale used by the unknown-focal parameterisations.
    double inverse_scale() const { return 1.0 / f_; }

    Mat3 K() const { return Eigen::Vector3d(f_, f_, 1.0).asDiagonal(); }
    Mat3 K_inv() const { return Eigen::Vector3d(1.0 / f_, 1.0 / f_, 1.0).asDiagonal(); }

    bool operator==(const Intrinsics &) const = default;

  private:
    double f_ = 1.0;
};

struct Correspondence {
    PixelPoint x1;
    PixelPoint x2;
    ImuAttitude att1;
    ImuAttitude att2;
};

struct RectifiedPoint {
    Vec3 y = Vec3::UnitZ();
};

// Restricted ground-plane homography, h = (h1, ..., h5).
struct GroundHomography {
    double h1 = 1.0;
    double h2 = 0.0;
    double h3 = 0.0;
    double h4 = 1.0;
    double h5 = 0.0;

    static GroundHomography from_vector(const Vec5 &h) { return {h[0], h[1], h[2], h[3], h[4]}; }
    Vec5 vector() const { return (Vec5() << h1, h2, h3, h4, h5).finished(); }

    Mat3 matrix() const {
        Mat3 m;
        m << h1, h3, h2, 0.0, h4, 0.0, -h2, h5, h1;
        return m;
    }

    double trig_residual() const { return std::abs(h1 * h1 + h2 * h2 - 1.0); }

    GroundHomography negated() const { return {-h1, -h2, -h3, -h4, -h5}; }
};

struct RelativePose {
    double yaw = 0.0;
    Mat3 R = Mat3::Identity();
    // Unit direction, or exactly zero.
    Vec3 t = Vec3::Zero();
    // Norm of t before normalisation (translation over plane depth).
    double t_norm = 0.0;
};

struct ScenarioConfig {
    Vec3 plane_normal = Vec3::UnitY();
    double plane_depth = 1.0;
    double focal1 = 1.0;
    double focal2 = 1.0;
};

inline RectifiedPoint rectify(const PixelPoint &x, const ImuAttitude &attitude, const Intrinsics &intr) {
    if (!x.finite()) throw Error(ErrorKind::InvalidInput, "non-finite pixel coordinate");
    const Vec3 ray(x.u / intr.focal(), x.v / intr.focal(), 1.0);
    return {attitude.matrix().transpose() * ray};
}

// Forward construction Hy = Ry(yaw) + t' n'^T with n' = (0, 1, 0), d' = 1.
inline GroundHomography make_ground_homography(double yaw, const Vec3 &t_prime) {
    return {std::cos(yaw), std::sin(yaw), t_prime.x(), 1.0 + t_prime.y(), t_prime.z()};
}

struct PoseExtractionOptions {
    double trig_tol = 1e-6;
    double zero_translation = 1e-9;
};

// Pose in the rectified frame.
inline RelativePose ground_homography_to_pose(const GroundHomography &h, const PoseExtractionOptions &opt = {}) {
    if (!h.vector().allFinite()) throw Error(ErrorKind::InvalidHomography, "non-finite entries");
    if (h.trig_residual() > opt.trig_tol)
        throw Error(ErrorKind::InvalidHomography, "h1^2 + h2^2 deviates from 1");
    RelativePose pose;
    pose.yaw = wrap_angle(std::atan2(h.h2, h.h1));
    pose.R << h.h1, 0.0, h.h2, 0.0, 1.0, 0.0, -h.h2, 0.0, h.h1;
    const Vec3 t(h.h3, h.h4 - 1.0, h.h5);
    pose.t_norm = t.norm();
    pose.t = pose.t_norm < opt.zero_translation ? Vec3::Zero() : Vec3(t / pose.t_norm);
    return pose;
}

// Lifts a rectified-frame pose to the camera frames: R = A2 Ry A1^T, t = A2 t'.
inline RelativePose compose_world_pose(const RelativePose &rel, const ImuAttitude &att1, const ImuAttitude &att2) {
    RelativePose out;
    out.yaw = rel.yaw;
    out.R = att2.matrix() * rel.R * att1.matrix().transpose();
    out.t_norm = rel.t_norm;
    const Vec3 t = att2.matrix() * rel.t;
    const double n = t.norm();
    out.t = n == 0.0 ? Vec3::Zero() : Vec3(t / n);
    return out;
}

struct SignedGroundHomographies {
    GroundHomography positive; // lambda = +1/sqrt(h1^2 + h2^2)
    GroundHomography negative; // lambda = -1/sqrt(h1^2 + h2^2)

    // The solution with h4 > 0 (plane on the same side of both cameras).
    const GroundHomography &cheiral() const { return positive.h4 >= 0.0 ? positive : negative; }
};

inline SignedGroundHomographies normalize_ground_homography(const Vec5 &h_raw) {
    if (!h_raw.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite homography entries");
    const double s2 = h_raw[0] * h_raw[0] + h_raw[1] * h_raw[1];
    if (!(s2 > 1e-24 * h_raw.squaredNorm()) || s2 == 0.0)
        throw Error(ErrorKind::DegenerateScale, "h1 = h2 = 0, trigonometric scale undefined");
    const double lambda = 1.0 / std::sqrt(s2);
    SignedGroundHomographies out;
    out.positive = GroundHomography::from_vector(lambda * h_raw);
    out.negative = out.positive.negated();
    return out;
}

// Hy ~ A2^T K2^-1 H K1 A1.
inline FullHomography hy_from_pixel_homography(const FullHomography &H, const ImuAttitude &att1,
                                               const ImuAttitude &att2, const Intrinsics &intr1,
                                               const Intrinsics &intr2) {
    return att2.matrix().transpose() * intr2.K_inv() * H * intr1.K() * att1.matrix();
}

// H ~ K2 A2 Hy A1^T K1^-1, the inverse of hy_from_pixel_homography.
inline FullHomography pixel_homography(const FullHomography &Hy, const ImuAttitude &att1, const ImuAttitude &att2,
                                       const Intrinsics &intr1, const Intrinsics &intr2) {
    return intr2.K() * att2.matrix() * Hy * att1.matrix().transpose() * intr1.K_inv();
}

} // namespace ghom

#endif // GHOM_GEOM_CORE_HPP
