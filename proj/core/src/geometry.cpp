#include "charentropy/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace charentropy::geom {

namespace {

// Basis tuples in lexicographic order for dim 2 and 3.
constexpr int kTuples3Deg1[3][3] = {{0}, {1}, {2}};
constexpr int kTuples3Deg2[3][3] = {{0, 1}, {0, 2}, {1, 2}};
constexpr int kTuples3Deg3[1][3] = {{0, 1, 2}};
constexpr int kTuples2Deg1[2][3] = {{0}, {1}};
constexpr int kTuples2Deg2[1][3] = {{0, 1}};
constexpr int kEmpty[1][3] = {{0}};

}  // namespace

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

const int* basis_tuple(int dim, int degree, int k) {
  if (degree == 0) return kEmpty[0];
  if (dim == 3) {
    if (degree == 1) return kTuples3Deg1[k];
    if (degree == 2) return kTuples3Deg2[k];
    if (degree == 3) return kTuples3Deg3[k];
  }
  if (dim == 2) {
    if (degree == 1) return kTuples2Deg1[k];
    if (degree == 2) return kTuples2Deg2[k];
  }
  throw InputError("unsupported (dim, degree) basis request");
}

int basis_position(int dim, int degree, const int* sorted) {
  const int n = binomial(dim, degree);
  for (int k = 0; k < n; ++k) {
    const int* tup = basis_tuple(dim, degree, k);
    bool same = true;
    for (int i = 0; i < degree; ++i)
      if (tup[i] != sorted[i]) {
        same = false;
        break;
      }
    if (same) return k;
  }
  return -1;
}

int sort_sign(int* ix, int n) {
  int sign = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (ix[i] == ix[j]) return 0;
      if (ix[i] > ix[j]) {
        std::swap(ix[i], ix[j]);
        sign = -sign;
      }
    }
  return sign;
}

int FormField::rank() const { return binomial(dim, degree); }

void VectorField::eval_jacobian(const double* p, double* jac) const {
  if (jacobian) {
    jacobian(p, jac);
    return;
  }
  double q[3], plus[3], minus[3];
  std::memcpy(q, p, sizeof(double) * dim);
  for (int j = 0; j < dim; ++j) {
    const double h = fd_step;
    q[j] = p[j] + h;
    components(q, plus);
    q[j] = p[j] - h;
    components(q, minus);
    q[j] = p[j];
    for (int i = 0; i < dim; ++i) jac[i * dim + j] = (plus[i] - minus[i]) / (2 * h);
  }
}

void FormField::eval_jacobian(const double* p, double* jac) const {
  if (coeff_jacobian) {
    coeff_jacobian(p, jac);
    return;
  }
  const int n = rank();
  double q[3];
  double plus[8], minus[8];
  std::memcpy(q, p, sizeof(double) * dim);
  for (int j = 0; j < dim; ++j) {
    const double h = fd_step;
    q[j] = p[j] + h;
    coeffs(q, plus);
    q[j] = p[j] - h;
    coeffs(q, minus);
    q[j] = p[j];
    for (int k = 0; k < n; ++k) jac[k * dim + j] = (plus[k] - minus[k]) / (2 * h);
  }
}

void lie_bracket(const VectorField& X, const VectorField& Y, const double* p, double* out) {
  if (X.dim != Y.dim) throw InputError("lie_bracket: dimension mismatch");
  const int d = X.dim;
  const double margin = std::max(X.fd_step, Y.fd_step);
  if (!X.domain.empty() && !X.domain.contains(p, margin))
    throw NumericsError("lie_bracket: point outside domain interior margin");
  double xv[3], yv[3], jx[9], jy[9];
  X.eval(p, xv);
  Y.eval(p, yv);
  X.eval_jacobian(p, jx);
  Y.eval_jacobian(p, jy);
  for (int i = 0; i < d; ++i) {
    double s = 0;
    for (int j = 0; j < d; ++j) s += xv[j] * jy[i * d + j] - yv[j] * jx[i * d + j];
    out[i] = s;
  }
}

void exterior_derivative(const FormField& w, const double* p, double* out) {
  if (w.degree >= w.dim) throw InputError("exterior_derivative: degree must be < dim");
  const int d = w.dim, deg = w.degree;
  const int n_in = binomial(d, deg), n_out = binomial(d, deg + 1);
  double jac[24];
  w.eval_jacobian(p, jac);
  for (int k = 0; k < n_out; ++k) {
    const int* tup = basis_tuple(d, deg + 1, k);
    double s = 0;
    int sub[3];
    for (int a = 0; a <= deg; ++a) {
      int m = 0;
      for (int i = 0; i <= deg; ++i)
        if (i != a) sub[m++] = tup[i];
      const int pos = deg == 0 ? 0 : basis_position(d, deg, sub);
      const double sign = (a % 2 == 0) ? 1.0 : -1.0;
      s += sign * jac[pos * d + tup[a]];
    }
    out[k] = s;
  }
  (void)n_in;
}

FormField exterior_derivative(const FormField& w) {
  if (w.degree >= w.dim) throw InputError("exterior_derivative: degree must be < dim");
  FormField dw;
  dw.dim = w.dim;
  dw.degree = w.degree + 1;
  dw.domain = w.domain;
  dw.fd_step = w.fd_step;
  const FormField base = w;
  dw.coeffs = [base](const double* p, double* out) { exterior_derivative(base, p, out); };

  // Coefficient derivatives of d(base) are second derivatives of base.
  // Differentiating the already finite-differenced coefficients would
  // amplify roundoff, so form them directly from the base data.
  const int d = w.dim, deg = w.degree;
  const int n_out = binomial(d, deg + 1);
  dw.coeff_jacobian = [base, d, deg, n_out](const double* p, double* jac) {
    const double h = std::max(kSecondFdStep, base.fd_step);
    const int nb = binomial(d, deg);
    // second_partials[pos][j][l] = d2 coeff_pos / dx_j dx_l
    double second[8][3][3];
    if (base.coeff_jacobian) {
      double q[3], jp[24], jm[24];
      std::memcpy(q, p, sizeof(double) * d);
      for (int l = 0; l < d; ++l) {
        q[l] = p[l] + h;
        base.coeff_jacobian(q, jp);
        q[l] = p[l] - h;
        base.coeff_jacobian(q, jm);
        q[l] = p[l];
        for (int pos = 0; pos < nb; ++pos)
          for (int j = 0; j < d; ++j)
            second[pos][j][l] = (jp[pos * d + j] - jm[pos * d + j]) / (2 * h);
      }
    } else {
      double q[3], cpp[8], cpm[8], cmp[8], cmm[8], c0[8], cp[8], cm[8];
      std::memcpy(q, p, sizeof(double) * d);
      base.coeffs(p, c0);
      for (int j = 0; j < d; ++j) {
        // pure second derivative
        q[j] = p[j] + h;
        base.coeffs(q, cp);
        q[j] = p[j] - h;
        base.coeffs(q, cm);
        q[j] = p[j];
        for (int pos = 0; pos < nb; ++pos)
          second[pos][j][j] = (cp[pos] - 2 * c0[pos] + cm[pos]) / (h * h);
        for (int l = j + 1; l < d; ++l) {
          q[j] = p[j] + h;
          q[l] = p[l] + h;
          base.coeffs(q, cpp);
          q[l] = p[l] - h;
          base.coeffs(q, cpm);
          q[j] = p[j] - h;
          base.coeffs(q, cmm);
          q[l] = p[l] + h;
          base.coeffs(q, cmp);
          q[j] = p[j];
          q[l] = p[l];
          for (int pos = 0; pos < nb; ++pos) {
            const double mixed = (cpp[pos] - cpm[pos] - cmp[pos] + cmm[pos]) / (4 * h * h);
            second[pos][j][l] = mixed;
            second[pos][l][j] = mixed;
          }
        }
      }
    }
    for (int k = 0; k < n_out; ++k) {
      const int* tup = basis_tuple(d, deg + 1, k);
      int sub[3];
      for (int l = 0; l < d; ++l) {
        double s = 0;
        for (int a = 0; a <= deg; ++a) {
          int m = 0;
          for (int i = 0; i <= deg; ++i)
            if (i != a) sub[m++] = tup[i];
          const int pos = deg == 0 ? 0 : basis_position(d, deg, sub);
          const double sign = (a % 2 == 0) ? 1.0 : -1.0;
          s += sign * second[pos][tup[a]][l];
        }
        jac[k * d + l] = s;
      }
    }
  };
  return dw;
}

void interior_product(const VectorField& X, const FormField& w, const double* p, double* out) {
  if (w.degree < 1) throw InputError("interior_product: degree must be >= 1");
  if (X.dim != w.dim) throw InputError("interior_product: dimension mismatch");
  const int d = w.dim, deg = w.degree;
  const int n_out = binomial(d, deg - 1);
  double xv[3], wc[8];
  X.eval(p, xv);
  w.eval(p, wc);
  for (int k = 0; k < n_out; ++k) {
    const int* tup = basis_tuple(d, deg - 1, k);
    double s = 0;
    int full[3];
    for (int j = 0; j < d; ++j) {
      full[0] = j;
      for (int i = 0; i < deg - 1; ++i) full[i + 1] = tup[i];
      int sorted[3];
      std::memcpy(sorted, full, sizeof(int) * deg);
      const int sign = sort_sign(sorted, deg);
      if (sign == 0) continue;
      const int pos = basis_position(d, deg, sorted);
      s += xv[j] * sign * wc[pos];
    }
    out[k] = s;
  }
}

OrientationSign orientation_compose(OrientationSign first, OrientationSign second, int p, int d,
                                    SignProduct mode) {
  if (p < 0 || d < p) throw InputError("orientation_compose: need 0 <= p <= d");
  const int flip = ((p * (d - p)) % 2 == 0) ? +1 : -1;
  OrientationSign out;
  switch (mode) {
    case SignProduct::kRTimes:  // o x theta -> total
      out.value = first.value * second.value;
      out.role = OrientationRole::kTotal;
      break;
    case SignProduct::kLTimes:  // theta |x o -> total, differs by (-1)^(p(d-p))
      out.value = flip * first.value * second.value;
      out.role = OrientationRole::kTotal;
      break;
    case SignProduct::kDivideRight:  // omega / o: o x result = omega
      out.value = first.value * second.value;
      out.role = OrientationRole::kBase;
      break;
    case SignProduct::kDivideLeft:  // o \ omega: result |x o = omega
      out.value = flip * second.value * first.value;
      out.role = OrientationRole::kBase;
      break;
  }
  return out;
}

FormField oriented_volume_form(ScalarField weight, Box domain) {
  FormField vol;
  vol.dim = 3;
  vol.degree = 3;
  vol.domain = domain;
  const ScalarField w = weight;
  vol.coeffs = [w](const double* p, double* out) { out[0] = kVolumeSign * w.value(p); };
  if (w.gradient) {
    vol.coeff_jacobian = [w](const double* p, double* jac) {
      double g[3];
      w.gradient(p, g);
      for (int j = 0; j < 3; ++j) jac[j] = kVolumeSign * g[j];
    };
  }
  return vol;
}

OddForm contracted_product(const DensitySpec& fiber_weight, const VectorField& X,
                           const DensitySpec& base_density, OrientationSign orientation) {
  if (X.dim != 3 || fiber_weight.dim != 3 || base_density.dim != 2)
    throw InputError("contracted_product: expects total dim 3 over base dim 2");
  OddForm odd;
  odd.orientation = orientation;
  FormField& f = odd.form;
  f.dim = 3;
  f.degree = 2;
  f.domain = X.domain;
  f.fd_step = X.fd_step;
  const ScalarField lam = fiber_weight.weight;
  const ScalarField mu = base_density.weight;
  const VectorField field = X;
  f.coeffs = [lam, mu, field](const double* p, double* out) {
    const double lw = lam.value(p);
    const double mw = mu.value(p);  // base weight; ignores the y slot by construction
    if (!(lw > 0) || !(mw > 0))
      throw InputError("contracted_product: weights must be strictly positive");
    double xv[3];
    field.eval(p, xv);
    const double w = kVolumeSign * lw * mw;
    // i_X(dx^dt^dy) coefficients in lex order (dx^dt, dx^dy, dt^dy)
    out[0] = w * xv[2];
    out[1] = -w * xv[1];
    out[2] = w * xv[0];
  };
  if (lam.gradient && mu.gradient && field.jacobian) {
    f.coeff_jacobian = [lam, mu, field](const double* p, double* jac) {
      const double lw = lam.value(p), mw = mu.value(p);
      double gl[3], gm[3], xv[3], jx[9];
      lam.gradient(p, gl);
      mu.gradient(p, gm);
      field.eval(p, xv);
      field.jacobian(p, jx);
      const double w = kVolumeSign * lw * mw;
      double gw[3];
      for (int j = 0; j < 3; ++j) gw[j] = kVolumeSign * (gl[j] * mw + lw * gm[j]);
      for (int j = 0; j < 3; ++j) {
        jac[0 * 3 + j] = gw[j] * xv[2] + w * jx[2 * 3 + j];
        jac[1 * 3 + j] = -(gw[j] * xv[1] + w * jx[1 * 3 + j]);
        jac[2 * 3 + j] = gw[j] * xv[0] + w * jx[0 * 3 + j];
      }
    };
  }
  return odd;
}

void field_from_two_form(const FormField& volume, const double* p, const double* two_form_coeffs,
                         double* field_out) {
  if (volume.degree != 3 || volume.dim != 3)
    throw InputError("field_from_two_form: volume must be a 3-form on the 3-space");
  double c;
  volume.eval(p, &c);
  if (std::fabs(c) < 1e-300) throw NumericsError("field_from_two_form: degenerate volume form");
  // i_X(c dx^dt^dy) = c (X_x dt^dy - X_t dx^dy + X_y dx^dt)
  field_out[0] = two_form_coeffs[2] / c;
  field_out[1] = -two_form_coeffs[1] / c;
  field_out[2] = two_form_coeffs[0] / c;
}

double divergence(const VectorField& X, const FormField& volume, const double* p) {
  double c;
  volume.eval(p, &c);
  if (std::fabs(c) < 1e-300) throw NumericsError("divergence: degenerate volume form");
  double gw[3];
  volume.eval_jacobian(p, gw);
  double xv[3], jx[9];
  X.eval(p, xv);
  X.eval_jacobian(p, jx);
  double s = 0;
  for (int i = 0; i < 3; ++i) s += gw[i] * xv[i] + c * jx[i * 3 + i];
  return s / c;
}

}  // namespace charentropy::geom
