/* Hot inner loops for the actor-critic kernels.
 *
 * Kept in plain C so the compiler sees restrict-qualified pointers and can
 * vectorize the RMSProp sqrt/divide chains; the Cython wrapper in
 * _kernels.pyx only moves data and orchestrates. Semantics must stay in
 * lockstep with the numpy fallback (kprl/_kernels_py.py).
 */

#include <math.h>

/* First-layer affine+tanh that only reads the first n_act inputs; callers
 * pass the length of x without its trailing zeros (zero inputs contribute
 * exactly nothing to the dot product). */
void kprl_affine_tanh_act(const double *restrict w, const double *restrict b,
                          const double *restrict x, double *restrict out,
                          long m, long n, long n_act) {
    for (long i = 0; i < m; i++) {
        double s = b[i];
        const double *row = w + i * n;
        for (long j = 0; j < n_act; j++)
            s += row[j] * x[j];
        out[i] = tanh(s);
    }
}

void kprl_affine_tanh(const double *restrict w, const double *restrict b,
                      const double *restrict x, double *restrict out,
                      long m, long n) {
    kprl_affine_tanh_act(w, b, x, out, m, n, n);
}

void kprl_affine(const double *restrict w, const double *restrict b,
                 const double *restrict x, double *restrict out,
                 long m, long n) {
    for (long i = 0; i < m; i++) {
        double s = b[i];
        const double *row = w + i * n;
        for (long j = 0; j < n; j++)
            s += row[j] * x[j];
        out[i] = s;
    }
}

/* out[j] = sum_i w[i,j] * g[i], accumulated row-wise for unit stride. */
void kprl_matvec_t(const double *restrict w, const double *restrict g,
                   double *restrict out, long m, long n) {
    for (long j = 0; j < n; j++)
        out[j] = 0.0;
    for (long i = 0; i < m; i++) {
        const double gi = g[i];
        const double *row = w + i * n;
        for (long j = 0; j < n; j++)
            out[j] += row[j] * gi;
    }
}

/* RMSProp over a weight matrix with gradient outer(rowg, colh).
 *
 * The loop is branchless so it vectorizes: a zero gradient entry decays the
 * accumulator and subtracts an exact 0 from the weight, which is identical
 * to skipping the parameter. Rows with rowg[i] == 0 (for example the whole
 * policy gradient when the advantage and entropy terms vanish) keep a
 * cheap decay-only path.
 */
void kprl_rms_mat(double *restrict acc, double *restrict w,
                  const double *restrict rowg, const double *restrict colh,
                  long m, long n, double decay, double lr, double eps) {
    const double omd = 1.0 - decay;
    for (long i = 0; i < m; i++) {
        const double gi = rowg[i];
        double *arow = acc + i * n;
        double *wrow = w + i * n;
        if (gi == 0.0) {
            for (long j = 0; j < n; j++)
                arow[j] *= decay;
            continue;
        }
        for (long j = 0; j < n; j++) {
            const double g = gi * colh[j];
            const double a = arow[j] * decay + omd * g * g;
            arow[j] = a;
            wrow[j] -= lr * g / (sqrt(a) + eps);
        }
    }
}

void kprl_rms_vec(double *restrict acc, double *restrict b,
                  const double *restrict g, long n, double decay, double lr,
                  double eps) {
    const double omd = 1.0 - decay;
    for (long j = 0; j < n; j++) {
        const double gj = g[j];
        const double a = acc[j] * decay + omd * gj * gj;
        acc[j] = a;
        b[j] -= lr * gj / (sqrt(a) + eps);
    }
}
