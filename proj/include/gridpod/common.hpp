#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gridpod {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Error type thrown by validation, solvers and model assembly.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Synchronous-frame qd pairs are stored as one complex number z = q - j*d.
/// With that encoding the steady-state branch voltage drop is the familiar
/// phasor product (R + jX) * i, and apparent power is v * conj(i).
inline double q_of(Complex z) { return z.real(); }
inline double d_of(Complex z) { return -z.imag(); }
inline Complex qd(double q, double d) { return Complex(q, -d); }

/// Rotate between the network synchronous frame and a device frame whose
/// q axis leads the network q axis by theta (rad).
inline Complex to_device_frame(Complex znet, double theta) {
    return znet * std::polar(1.0, -theta);
}
inline Complex to_network_frame(Complex zdev, double theta) {
    return zdev * std::polar(1.0, theta);
}

inline double clamp(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

/// Base quantities of the common system per-unit frame.
struct SystemBase {
    double s_mva = 100.0;
    double f_hz = 50.0;
    double omega_rad_s() const { return 2.0 * kPi * f_hz; }
};

/// Impedance given in per unit on a device rating, expressed on the system
/// base (same voltage base on both sides).
inline double z_dev_to_sys(double z_dev_pu, double s_dev_mva, double s_sys_mva) {
    return z_dev_pu * s_sys_mva / s_dev_mva;
}
inline double z_sys_to_dev(double z_sys_pu, double s_dev_mva, double s_sys_mva) {
    return z_sys_pu * s_dev_mva / s_sys_mva;
}
/// Admittances scale inversely to impedances.
inline double y_dev_to_sys(double y_dev_pu, double s_dev_mva, double s_sys_mva) {
    return y_dev_pu * s_dev_mva / s_sys_mva;
}
/// Powers and currents (same voltage base) scale with the MVA ratio.
inline double s_dev_to_sys(double s_dev_pu, double s_dev_mva, double s_sys_mva) {
    return s_dev_pu * s_dev_mva / s_sys_mva;
}
inline double s_sys_to_dev(double s_sys_pu, double s_dev_mva, double s_sys_mva) {
    return s_sys_pu * s_sys_mva / s_dev_mva;
}

/// Damping ratio of an eigenvalue sigma + j*omega, as a fraction.
inline double damping_ratio(Complex lambda) {
    double mag = std::abs(lambda);
    if (mag == 0.0) return 0.0;
    return -lambda.real() / mag;
}

inline double frequency_hz(Complex lambda) {
    return std::abs(lambda.imag()) / (2.0 * kPi);
}

namespace detail {

/// Run fn(i) for every i in [0, n) on a small worker pool and wait for all of
/// them. Each call must write only to its own pre-sized slot, which keeps the
/// result independent of scheduling. The first exception wins and is rethrown.
template <typename Fn>
void parallel_for_indexed(int n, Fn&& fn) {
    if (n <= 0) return;
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = std::min<int>(n, hw ? static_cast<int>(hw) : 2);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mtx);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace detail

}  // namespace gridpod
