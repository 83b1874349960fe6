use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// Dense network: `input -> tanh(hidden) -> output`, or a single affine map
/// when `hidden == 0`.
///
/// Parameters are one flat slice laid out as `[W1, b1, W2, b2]` (row-major
/// weights) or `[W, b]` for the linear case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl NetworkShape {
    pub fn num_params(&self) -> usize {
        if self.hidden == 0 {
            self.output * self.input + self.output
        } else {
            self.hidden * self.input + self.hidden + self.output * self.hidden + self.output
        }
    }

    /// Uniform fan-in initialization; the output layer is shrunk by `output_scale`.
    pub fn init(&self, rng: &mut Rng, output_scale: f64) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.num_params());
        let mut layer = |w: &mut Vec<f64>, rows: usize, cols: usize, scale: f64| {
            let bound = scale / (cols.max(1) as f64).sqrt();
            w.extend((0..rows * cols).map(|_| rng.random_range(-bound..=bound)));
            w.extend(std::iter::repeat_n(0.0, rows));
        };
        if self.hidden == 0 {
            layer(&mut w, self.output, self.input, output_scale);
        } else {
            layer(&mut w, self.hidden, self.input, 1.0);
            layer(&mut w, self.output, self.hidden, output_scale);
        }
        w
    }

    pub fn forward(&self, w: &[f64], x: &[f64]) -> Activations {
        debug_assert_eq!(w.len(), self.num_params());
        debug_assert_eq!(x.len(), self.input);
        if self.hidden == 0 {
            return Activations {
                hidden: Vec::new(),
                output: affine(w, self.output, self.input, x),
            };
        }
        let split = self.hidden * self.input + self.hidden;
        let hidden: Vec<f64> = affine(&w[..split], self.hidden, self.input, x)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let output = affine(&w[split..], self.output, self.hidden, &hidden);
        Activations { hidden, output }
    }

    /// Accumulates `d(output . dy)/dw` into `grad`.
    pub fn backward(&self, w: &[f64], x: &[f64], act: &Activations, dy: &[f64], grad: &mut [f64]) {
        if self.hidden == 0 {
            affine_backward(self.output, self.input, x, dy, grad);
            return;
        }
        let split = self.hidden * self.input + self.hidden;
        let (_, w2) = w.split_at(split);
        let (g1, g2) = grad.split_at_mut(split);
        affine_backward(self.output, self.hidden, &act.hidden, dy, g2);
        let mut dh = vec![0.0; self.hidden];
        for (o, &d) in dy.iter().enumerate() {
            let row = &w2[o * self.hidden..(o + 1) * self.hidden];
            for (h, &wv) in dh.iter_mut().zip(row) {
                *h += d * wv;
            }
        }
        for (h, &a) in dh.iter_mut().zip(&act.hidden) {
            *h *= 1.0 - a * a;
        }
        affine_backward(self.hidden, self.input, x, &dh, g1);
    }
}

fn affine(w: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    let (weights, bias) = w.split_at(rows * cols);
    (0..rows)
        .map(|r| {
            bias[r]
                + weights[r * cols..(r + 1) * cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
        .collect()
}

fn affine_backward(rows: usize, cols: usize, x: &[f64], dy: &[f64], grad: &mut [f64]) {
    let (gw, gb) = grad.split_at_mut(rows * cols);
    for r in 0..rows {
        let d = dy[r];
        if d == 0.0 {
            continue;
        }
        for (g, &xv) in gw[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *g += d * xv;
        }
        gb[r] += d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn check_backward(shape: NetworkShape) {
        let mut rng = stream(&[9]);
        let w = shape.init(&mut rng, 1.0);
        let x: Vec<f64> = (0..shape.input).map(|i| 0.3 * i as f64 - 0.4).collect();
        let dy: Vec<f64> = (0..shape.output).map(|i| 1.0 + i as f64).collect();
        let f = |w: &[f64]| -> f64 {
            shape.forward(w, &x).output.iter().zip(&dy).map(|(a, b)| a * b).sum()
        };
        let mut grad = vec![0.0; w.len()];
        shape.backward(&w, &x, &shape.forward(&w, &x), &dy, &mut grad);
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += 1e-6;
            wm[k] -= 1e-6;
            let fd = (f(&wp) - f(&wm)) / 2e-6;
            assert!((fd - grad[k]).abs() < 1e-6, "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        check_backward(NetworkShape { input: 3, hidden: 5, output: 2 });
        check_backward(NetworkShape { input: 4, hidden: 0, output: 3 });
    }

    #[test]
    fn param_counts() {
        assert_eq!(NetworkShape { input: 1, hidden: 32, output: 2 }.num_params(), 32 + 32 + 64 + 2);
        assert_eq!(NetworkShape { input: 4, hidden: 0, output: 2 }.num_params(), 10);
    }
}
