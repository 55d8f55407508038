#pragma once

// Tangent-flow integration: state plus fundamental matrix M with
// M' = J(s(t))·M, M(t0) = I, packed as a 12-vector (s, M row-major).

#include <vector>

#include "jtenso/integrator.hpp"

namespace jtenso {

using Vec12 = Vec<12>;

/// Field must provide operator()(t, s) -> Vec3 and jacobian_at(t, s) -> Mat3.
template <class Field>
class VariationalField {
 public:
  explicit VariationalField(Field f) : f_(std::move(f)) {}

  Vec12 operator()(double t, const Vec12& y) const {
    const Vec3 s{y[0], y[1], y[2]};
    const Vec3 ds = f_(t, s);
    const Mat3 j = f_.jacobian_at(t, s);
    Vec12 out;
    out[0] = ds[0];
    out[1] = ds[1];
    out[2] = ds[2];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        out[3 + 3 * r + c] = j[r][0] * y[3 + c] + j[r][1] * y[6 + c] + j[r][2] * y[9 + c];
    return out;
  }

 private:
  Field f_;
};

inline Vec12 pack(const Vec3& s, const Mat3& m) {
  Vec12 y;
  y[0] = s[0];
  y[1] = s[1];
  y[2] = s[2];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) y[3 + 3 * r + c] = m[r][c];
  return y;
}

inline Vec3 state_part(const Vec12& y) { return {y[0], y[1], y[2]}; }

inline Mat3 matrix_part(const Vec12& y) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = y[3 + 3 * r + c];
  return m;
}

struct VariationalTrajectory {
  Trajectory<12> raw;

  std::size_t size() const { return raw.size(); }
  double time(std::size_t i) const { return raw.times[i]; }
  Vec3 state(std::size_t i) const { return state_part(raw.states[i]); }
  Mat3 fundamental(std::size_t i) const { return matrix_part(raw.states[i]); }
  Vec3 state_at(double t) const { return state_part(raw.at(t)); }
  Mat3 fundamental_at(double t) const { return matrix_part(raw.at(t)); }
};

template <class Field>
VariationalTrajectory integrate_variational(Field field, const Vec3& s0, double t0, double t1,
                                            const IntegratorConfig& cfg = {}) {
  return {integrate<12>(VariationalField<Field>(std::move(field)), pack(s0, identity3()), t0, t1,
                        cfg)};
}

/// Endpoint state and fundamental matrix over [t0, t1].
template <class Field>
std::pair<Vec3, Mat3> flow_with_tangent(Field field, const Vec3& s0, double t0, double t1,
                                        const IntegratorConfig& cfg = {}) {
  const Vec12 y = flow<12>(VariationalField<Field>(std::move(field)), pack(s0, identity3()), t0, t1,
                           cfg);
  return {state_part(y), matrix_part(y)};
}

}  // namespace jtenso
