//! Grid search with golden-section refinement for box-constrained minima.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on [lo, hi]; returns the best point seen,
/// endpoints included, so non-unimodal inputs never do worse than them.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let mut best = (lo, f(lo));
    let fh = f(hi);
    if fh < best.1 {
        best = (hi, fh);
    }
    if !(hi > lo) {
        return best;
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < best.1 {
            best = (c, fc);
        }
        if fd < best.1 {
            best = (d, fd);
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Alternating one-dimensional golden sections inside a box, starting at
/// `start`. Never returns a value above f(start).
pub fn box_golden_min(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], start: &[f64], sweeps: usize) -> (Vec<f64>, f64) {
    box_golden_min_iters(f, lo, hi, start, sweeps, 40)
}

pub fn box_golden_min_iters(
    f: impl Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    start: &[f64],
    sweeps: usize,
    iters: usize,
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let n = x.len();
    for _ in 0..sweeps {
        for i in 0..n {
            let mut y = x.clone();
            let (xi, v) = golden_min(
                |t| {
                    y[i] = t;
                    f(&y)
                },
                lo[i],
                hi[i],
                iters,
            );
            if v < fx {
                x[i] = xi;
                fx = v;
            }
        }
    }
    (x, fx)
}

/// Minimum of f over a regular grid of `m`+1 points per axis on a box,
/// then refined by [`box_golden_min`] in the surrounding grid cell.
pub fn grid_then_golden(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], m: usize) -> (Vec<f64>, f64) {
    let n = lo.len();
    let total = (m + 1).pow(n as u32);
    let mut best_x = lo.to_vec();
    let mut best = f(lo);
    let mut x = vec![0.0; n];
    for k in 0..total {
        let mut r = k;
        for i in 0..n {
            let j = r % (m + 1);
            r /= m + 1;
            x[i] = lo[i] + (hi[i] - lo[i]) * j as f64 / m as f64;
        }
        let v = f(&x);
        if v < best {
            best = v;
            best_x.copy_from_slice(&x);
        }
    }
    let cell_lo: Vec<f64> = (0..n).map(|i| (best_x[i] - (hi[i] - lo[i]) / m as f64).max(lo[i])).collect();
    let cell_hi: Vec<f64> = (0..n).map(|i| (best_x[i] + (hi[i] - lo[i]) / m as f64).min(hi[i])).collect();
    box_golden_min(f, &cell_lo, &cell_hi, &best_x, 3)
}
