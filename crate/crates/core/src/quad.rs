//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The integrand returns a pair `(f, aux)`; `aux` is integrated with the same
//! Kronrod rule on the final partition and no error control. Nested
//! integrations use it to carry the inner error estimates outward.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub aux: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    aux: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn kronrod<F: Fn(f64) -> (f64, f64)>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, ac) = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut aux = WGK[7] * ac;
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, a1) = f(c - dx);
        let (f2, a2) = f(c + dx);
        k += WGK[i] * (f1 + f2);
        aux += WGK[i] * (a1 + a2);
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    Piece {
        a,
        b,
        value: k * h,
        err: ((k - g) * h).abs(),
        aux: aux * h,
    }
}

/// Integrates over `[breaks[0], breaks[last]]`, starting from the partition
/// given by `breaks` and bisecting the worst interval until the summed error
/// estimate drops below `max(abs_tol, rel_tol·|I|)` or `max_intervals` is hit.
pub fn integrate<F>(f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_intervals: usize) -> QuadResult
where
    F: Fn(f64) -> (f64, f64),
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&f, w[0], w[1]));
        }
    }
    loop {
        let (value, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        let target = abs_tol.max(rel_tol * value.abs());
        if err <= target || heap.len() >= max_intervals {
            let aux = heap.iter().map(|p| p.aux).sum();
            return QuadResult {
                value,
                abs_err: err,
                aux,
                intervals: heap.len(),
            };
        }
        let worst = heap.pop().expect("non-empty partition");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval cannot be split further in floating point
            heap.push(Piece { err: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod(&f, worst.a, mid));
        heap.push(kronrod(&f, mid, worst.b));
    }
}

/// Sorted, deduplicated breakpoints clamped to `[lo, hi]`.
pub fn breakpoints(lo: f64, hi: f64, interior: &[f64]) -> Vec<f64> {
    let mut v = vec![lo, hi];
    v.extend(interior.iter().copied().filter(|x| *x > lo && *x < hi));
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}
