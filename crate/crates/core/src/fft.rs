//! Discrete Fourier transforms.
//!
//! [`Fft`] is an in-place complex transform: iterative radix-2 for
//! power-of-two sizes and Bluestein's chirp-z for everything else.
//! [`RealFft`] handles even-length real frames by packing them into a
//! half-size complex transform.
//!
//! Transforms are unnormalized in the forward direction; [`RealFft::inverse`]
//! applies the `1/n` factor so that `inverse(forward(x)) == x`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

fn twiddle(num: usize, den: usize, sign: f64) -> Complex64 {
    // num/den reduced so the angle stays in [0, 2pi)
    let angle = 2.0 * PI * ((num % den) as f64) / den as f64;
    let (s, c) = libm::sincos(angle);
    Complex64::new(c, sign * s)
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    // e^{-2 pi i j / n}, j < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (32 - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2).map(|j| twiddle(j, n, -1.0)).collect();
        Radix2 {
            n,
            twiddles,
            bitrev,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    n: usize,
    inner: Radix2,
    // e^{-i pi k^2 / n}
    chirp: Vec<Complex64>,
    // forward transform of the conjugate chirp, pre-divided by inner size
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let chirp: Vec<Complex64> = (0..n).map(|k| twiddle(k * k, 2 * n, -1.0)).collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, false);
        let scale = 1.0 / m as f64;
        for v in kernel.iter_mut() {
            *v *= scale;
        }
        Bluestein {
            n,
            inner,
            chirp,
            kernel,
        }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let m = self.inner.n;
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..self.n {
            let x = if inverse { buf[k].conj() } else { buf[k] };
            work[k] = x * self.chirp[k];
        }
        self.inner.process(&mut work, false);
        for (w, k) in work.iter_mut().zip(self.kernel.iter()) {
            *w *= k;
        }
        self.inner.process(&mut work, true);
        for k in 0..self.n {
            let y = work[k] * self.chirp[k];
            buf[k] = if inverse { y.conj() } else { y };
        }
    }
}

#[derive(Debug, Clone)]
enum Algorithm {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// Complex FFT of a fixed size.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    algorithm: Algorithm,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        let algorithm = if n <= 1 {
            Algorithm::Trivial
        } else if n.is_power_of_two() {
            Algorithm::Radix2(Radix2::new(n))
        } else {
            Algorithm::Bluestein(Bluestein::new(n))
        };
        Fft { n, algorithm }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `X[k] = sum_j x[j] e^{-2 pi i jk/n}`, in place.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.process(buf, false)
    }

    /// Unnormalized inverse: `x[j] = sum_k X[k] e^{+2 pi i jk/n}`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.process(buf, true)
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.n, "fft buffer length mismatch");
        match &self.algorithm {
            Algorithm::Trivial => {}
            Algorithm::Radix2(r) => r.process(buf, inverse),
            Algorithm::Bluestein(b) => b.process(buf, inverse),
        }
    }
}

/// One-sided transform of real frames with even length `n`, producing
/// `n/2 + 1` bins.
#[derive(Debug, Clone)]
pub struct RealFft {
    n: usize,
    half: Fft,
    // e^{-2 pi i k / n}, k <= n/4 (+1)
    twiddles: Vec<Complex64>,
}

impl RealFft {
    /// # Panics
    /// If `n` is zero or odd.
    pub fn new(n: usize) -> Self {
        assert!(
            n >= 2 && n.is_multiple_of(2),
            "real fft length must be even and >= 2"
        );
        let h = n / 2;
        RealFft {
            n,
            half: Fft::new(h),
            twiddles: (0..=h).map(|k| twiddle(k, n, -1.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bins(&self) -> usize {
        self.n / 2 + 1
    }

    /// Forward transform of `input` (length `n`) into `output` (length `n/2 + 1`).
    pub fn forward(&self, input: &[f64], output: &mut [Complex64]) {
        let h = self.n / 2;
        assert_eq!(input.len(), self.n);
        assert_eq!(output.len(), h + 1);
        for m in 0..h {
            output[m] = Complex64::new(input[2 * m], input[2 * m + 1]);
        }
        self.half.forward(&mut output[..h]);

        let z0 = output[0];
        output[0] = Complex64::new(z0.re + z0.im, 0.0);
        output[h] = Complex64::new(z0.re - z0.im, 0.0);

        let half_i = Complex64::new(0.0, -0.5);
        for k in 1..=h / 2 {
            let j = h - k;
            let zk = output[k];
            let zj = output[j];
            // even/odd sub-spectra for bin k; bin j uses their conjugates
            let even = (zk + zj.conj()) * 0.5;
            let odd = (zk - zj.conj()) * half_i;
            output[k] = even + self.twiddles[k] * odd;
            if j != k {
                output[j] = even.conj() + self.twiddles[j] * odd.conj();
            }
        }
    }

    /// Inverse of [`forward`](Self::forward), normalized by `1/n`.
    ///
    /// The imaginary parts of the DC and Nyquist bins are ignored.
    /// `scratch` must hold `n/2` values and `output` `n`.
    pub fn inverse(&self, input: &[Complex64], output: &mut [f64], scratch: &mut [Complex64]) {
        let h = self.n / 2;
        assert_eq!(input.len(), h + 1);
        assert_eq!(output.len(), self.n);
        assert_eq!(scratch.len(), h);

        let x0 = input[0].re;
        let xh = input[h].re;
        scratch[0] = Complex64::new(0.5 * (x0 + xh), 0.5 * (x0 - xh));

        let half_i = Complex64::new(0.0, 0.5);
        for k in 1..=h / 2 {
            let j = h - k;
            let xk = input[k];
            let xj = input[j];
            let even = (xk + xj.conj()) * 0.5;
            let odd = (xk - xj.conj()) * self.twiddles[k].conj();
            scratch[k] = even + odd * half_i;
            if j != k {
                let even_j = even.conj();
                let odd_j = odd.conj();
                scratch[j] = even_j + odd_j * half_i;
            }
        }
        self.half.inverse(scratch);
        let scale = 1.0 / h as f64;
        for m in 0..h {
            output[2 * m] = scratch[m].re * scale;
            output[2 * m + 1] = scratch[m].im * scale;
        }
    }
}
