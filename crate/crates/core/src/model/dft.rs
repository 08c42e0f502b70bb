use num_complex::Complex64;
use rustfft::FftPlanner;

/// Unitary DFT: `X[k] = n^{-1/2} Σ x[i] e^{-j2πik/n}`, so energy is preserved.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, false)
}

/// Inverse of [`dft`].
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    transform(x, true)
}

fn transform(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}
