# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-step actor-critic kernels.

Drop-in twin of kprl._kernels_py: fixed-topology MLPs (input -> 64 -> 64
-> output, tanh hidden layers) with fused backward + RMSProp steps. The
arithmetic lives in _corelib.c where restrict-qualified pointers let the
compiler vectorize; this module owns buffers and sequencing. kprl.backend
picks between this and the numpy fallback at import time.
"""

from libc.math cimport exp, isfinite, log

import numpy as np

from .errors import NumericsError

cdef extern from "_corelib.h":
    void kprl_affine_tanh(const double* w, const double* b, const double* x,
                          double* out, long m, long n) nogil
    void kprl_affine(const double* w, const double* b, const double* x,
                     double* out, long m, long n) nogil
    void kprl_matvec_t(const double* w, const double* g, double* out,
                       long m, long n) nogil
    void kprl_rms_mat(double* acc, double* w, const double* rowg,
                      const double* colh, long m, long n, double decay,
                      double lr, double eps) nogil
    void kprl_rms_vec(double* acc, double* b, const double* g, long n,
                      double decay, double lr, double eps) nogil

BACKEND_NAME = "compiled"


cdef inline double* ptr2(double[:, ::1] a) noexcept nogil:
    return &a[0, 0]


cdef inline double* ptr1(double[::1] a) noexcept nogil:
    return &a[0]


cdef class A2CCore:
    """See kprl._kernels_py.A2CCore; same construction and call protocol."""

    cdef double[:, ::1] pw1, pw2, pw3, vw1, vw2, vw3
    cdef double[::1] pb1, pb2, pb3, vb1, vb2, vb3
    cdef double[:, ::1] paw1, paw2, paw3, vaw1, vaw2, vaw3
    cdef double[::1] pab1, pab2, pab3, vab1, vab2, vab3
    cdef double[::1] iscale
    cdef double gamma, lr, decay, eps, entropy_coef
    cdef long din, h1n, h2n, nout, vh1n, vh2n
    cdef double[::1] xs, h1p, h2p, logp, probs_v
    cdef double[::1] vxs, vh1, vh2, txs, th1, th2
    cdef double[::1] gz, dh, dz
    cdef readonly object probs

    def __init__(self, policy_arrays, value_arrays, policy_accum, value_accum,
                 input_scale, double gamma, double lr, double decay, double eps,
                 double entropy_coef):
        self.pw1, self.pb1, self.pw2, self.pb2, self.pw3, self.pb3 = policy_arrays
        self.vw1, self.vb1, self.vw2, self.vb2, self.vw3, self.vb3 = value_arrays
        self.paw1, self.pab1, self.paw2, self.pab2, self.paw3, self.pab3 = policy_accum
        self.vaw1, self.vab1, self.vaw2, self.vab2, self.vaw3, self.vab3 = value_accum
        self.iscale = input_scale
        self.gamma = gamma
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.entropy_coef = entropy_coef
        self.din = self.pw1.shape[1]
        self.h1n = self.pw1.shape[0]
        self.h2n = self.pw2.shape[0]
        self.nout = self.pw3.shape[0]
        self.vh1n = self.vw1.shape[0]
        self.vh2n = self.vw2.shape[0]
        if self.vw1.shape[1] != self.din or self.vw3.shape[0] != 1:
            raise ValueError("value net dims do not match the policy net input")
        self.probs = np.zeros(self.nout)
        self.probs_v = self.probs
        self.xs = np.zeros(self.din)
        self.h1p = np.zeros(self.h1n)
        self.h2p = np.zeros(self.h2n)
        self.logp = np.zeros(self.nout)
        self.vxs = np.zeros(self.din)
        self.vh1 = np.zeros(self.vh1n)
        self.vh2 = np.zeros(self.vh2n)
        self.txs = np.zeros(self.din)
        self.th1 = np.zeros(self.vh1n)
        self.th2 = np.zeros(self.vh2n)
        self.gz = np.zeros(self.nout)
        self.dh = np.zeros(max(self.h1n, self.h2n, self.vh1n, self.vh2n))
        self.dz = np.zeros(max(self.h1n, self.h2n, self.vh1n, self.vh2n))

    def policy_forward(self, double[::1] x):
        cdef long i, j
        cdef double zmax, s
        with nogil:
            for j in range(self.din):
                self.xs[j] = x[j] / self.iscale[j]
            kprl_affine_tanh(ptr2(self.pw1), ptr1(self.pb1), ptr1(self.xs),
                             ptr1(self.h1p), self.h1n, self.din)
            kprl_affine_tanh(ptr2(self.pw2), ptr1(self.pb2), ptr1(self.h1p),
                             ptr1(self.h2p), self.h2n, self.h1n)
            kprl_affine(ptr2(self.pw3), ptr1(self.pb3), ptr1(self.h2p),
                        ptr1(self.logp), self.nout, self.h2n)
            zmax = self.logp[0]
            for i in range(1, self.nout):
                if self.logp[i] > zmax:
                    zmax = self.logp[i]
            s = 0.0
            for i in range(self.nout):
                s += exp(self.logp[i] - zmax)
            s = zmax + log(s)
            for i in range(self.nout):
                self.logp[i] -= s
                self.probs_v[i] = exp(self.logp[i])
        return self.probs

    cdef double _value(self, double[::1] x, bint cache) noexcept nogil:
        cdef long j
        cdef double s
        cdef double[::1] bxs = self.vxs if cache else self.txs
        cdef double[::1] bh1 = self.vh1 if cache else self.th1
        cdef double[::1] bh2 = self.vh2 if cache else self.th2
        for j in range(self.din):
            bxs[j] = x[j] / self.iscale[j]
        kprl_affine_tanh(ptr2(self.vw1), ptr1(self.vb1), ptr1(bxs),
                         ptr1(bh1), self.vh1n, self.din)
        kprl_affine_tanh(ptr2(self.vw2), ptr1(self.vb2), ptr1(bh1),
                         ptr1(bh2), self.vh2n, self.vh1n)
        s = self.vb3[0]
        for j in range(self.vh2n):
            s += self.vw3[0, j] * bh2[j]
        return s

    def value_forward(self, double[::1] x):
        return self._value(x, False)

    def update(self, double[::1] x, long action, double reward,
               double[::1] x2, bint done):
        cdef long i, j
        cdef double v2, v1, target, adv, ent, gv
        with nogil:
            v2 = 0.0 if done else self._value(x2, False)
            v1 = self._value(x, True)
        target = reward + self.gamma * v2
        adv = target - v1
        if not (isfinite(adv) and isfinite(v1)):
            raise NumericsError(
                f"non-finite TD quantities: V(s)={v1}, target={target}"
            )
        with nogil:
            # Policy head gradient: adv * (p - onehot) + entropy term.
            ent = 0.0
            if self.entropy_coef != 0.0:
                for i in range(self.nout):
                    ent -= self.probs_v[i] * self.logp[i]
            for i in range(self.nout):
                self.gz[i] = adv * self.probs_v[i]
            self.gz[action] -= adv
            if self.entropy_coef != 0.0:
                for i in range(self.nout):
                    self.gz[i] += (
                        self.entropy_coef * self.probs_v[i] * (self.logp[i] + ent)
                    )
            kprl_matvec_t(ptr2(self.pw3), ptr1(self.gz), ptr1(self.dh),
                          self.nout, self.h2n)
            kprl_rms_mat(ptr2(self.paw3), ptr2(self.pw3), ptr1(self.gz),
                         ptr1(self.h2p), self.nout, self.h2n,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.pab3), ptr1(self.pb3), ptr1(self.gz),
                         self.nout, self.decay, self.lr, self.eps)
            for j in range(self.h2n):
                self.dz[j] = (1.0 - self.h2p[j] * self.h2p[j]) * self.dh[j]
            kprl_matvec_t(ptr2(self.pw2), ptr1(self.dz), ptr1(self.dh),
                          self.h2n, self.h1n)
            kprl_rms_mat(ptr2(self.paw2), ptr2(self.pw2), ptr1(self.dz),
                         ptr1(self.h1p), self.h2n, self.h1n,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.pab2), ptr1(self.pb2), ptr1(self.dz),
                         self.h2n, self.decay, self.lr, self.eps)
            for j in range(self.h1n):
                self.dz[j] = (1.0 - self.h1p[j] * self.h1p[j]) * self.dh[j]
            kprl_rms_mat(ptr2(self.paw1), ptr2(self.pw1), ptr1(self.dz),
                         ptr1(self.xs), self.h1n, self.din,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.pab1), ptr1(self.pb1), ptr1(self.dz),
                         self.h1n, self.decay, self.lr, self.eps)

            # Value backward with the TD target held fixed.
            gv = 2.0 * (v1 - target)
            for j in range(self.vh2n):
                self.dh[j] = self.vw3[0, j] * gv
            self.gz[0] = gv
            kprl_rms_mat(ptr2(self.vaw3), ptr2(self.vw3), ptr1(self.gz),
                         ptr1(self.vh2), 1, self.vh2n,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.vab3), ptr1(self.vb3), ptr1(self.gz),
                         1, self.decay, self.lr, self.eps)
            for j in range(self.vh2n):
                self.dz[j] = (1.0 - self.vh2[j] * self.vh2[j]) * self.dh[j]
            kprl_matvec_t(ptr2(self.vw2), ptr1(self.dz), ptr1(self.dh),
                          self.vh2n, self.vh1n)
            kprl_rms_mat(ptr2(self.vaw2), ptr2(self.vw2), ptr1(self.dz),
                         ptr1(self.vh1), self.vh2n, self.vh1n,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.vab2), ptr1(self.vb2), ptr1(self.dz),
                         self.vh2n, self.decay, self.lr, self.eps)
            for j in range(self.vh1n):
                self.dz[j] = (1.0 - self.vh1[j] * self.vh1[j]) * self.dh[j]
            kprl_rms_mat(ptr2(self.vaw1), ptr2(self.vw1), ptr1(self.dz),
                         ptr1(self.vxs), self.vh1n, self.din,
                         self.decay, self.lr, self.eps)
            kprl_rms_vec(ptr1(self.vab1), ptr1(self.vb1), ptr1(self.dz),
                         self.vh1n, self.decay, self.lr, self.eps)
        return adv, v1, target
