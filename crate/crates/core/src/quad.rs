//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Per-component sum of the interval error estimates.
    pub error: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn max_error(&self) -> f64 {
        self.error.iter().cloned().fold(0.0, f64::max)
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    key: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn gk15<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let fc = f(c);
    for k in 0..dim {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for k in 0..dim {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let value: Vec<f64> = kron.iter().map(|v| v * h).collect();
    let error = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * h).abs()).collect();
    (value, error)
}

/// Integrate `f` over the union of the intervals delimited by `points`
/// (sorted, at least two), refining the worst panel until the summed error
/// estimate of every component is below `tol` or `max_panels` is reached.
pub fn integrate<F: Fn(f64) -> Vec<f64>>(f: F, points: &[f64], tol: f64, max_panels: usize) -> QuadResult {
    let dim = f(0.5 * (points[0] + points[points.len() - 1])).len();
    let mut heap = BinaryHeap::new();
    let mut evaluations = 1;
    let push = |heap: &mut BinaryHeap<Panel>, a: f64, b: f64| {
        let (value, error) = gk15(&f, a, b, dim);
        let key = error.iter().cloned().fold(0.0, f64::max);
        heap.push(Panel { a, b, value, error, key });
    };
    for w in points.windows(2) {
        if w[1] > w[0] {
            push(&mut heap, w[0], w[1]);
            evaluations += 15;
        }
    }
    let total_error = |heap: &BinaryHeap<Panel>| {
        let mut e = vec![0.0; dim];
        for p in heap.iter() {
            for k in 0..dim {
                e[k] += p.error[k];
            }
        }
        e
    };
    let mut converged = false;
    loop {
        let err = total_error(&heap);
        if err.iter().all(|&e| e <= tol) {
            converged = true;
            break;
        }
        if heap.len() >= max_panels {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine precision; keep it and stop.
            heap.push(worst);
            break;
        }
        push(&mut heap, worst.a, mid);
        push(&mut heap, mid, worst.b);
        evaluations += 30;
    }
    // Sum in a fixed order so the result does not depend on heap layout.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for p in &panels {
        for k in 0..dim {
            value[k] += p.value[k];
            error[k] += p.error[k];
        }
    }
    QuadResult { value, error, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| vec![x.powi(5) - 3.0 * x * x, 1.0], &[-1.0, 2.0], 1e-13, 100);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value[0] - exact).abs() < 1e-13);
        assert!((r.value[1] - 3.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn sqrt_endpoint_needs_refinement() {
        let r = integrate(|x| vec![x.sqrt()], &[0.0, 1.0], 1e-11, 1000);
        assert!(r.converged);
        assert!((r.value[0] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_handle_steps() {
        let r = integrate(|x| vec![if x < 0.3 { 1.0 } else { 0.0 }], &[0.0, 0.3, 1.0], 1e-14, 10);
        assert!((r.value[0] - 0.3).abs() < 1e-15);
    }
}
