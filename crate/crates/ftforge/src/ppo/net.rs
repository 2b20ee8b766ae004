//! Two-hidden-layer ReLU multilayer perceptron with an exact hand-written
//! backward pass. The topology is fixed, so the backward pass is ~40 lines
//! and fully checkable against finite differences.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Per-layer orthogonal-init gains: hidden layers use sqrt(2) (ReLU), the
/// actor head 0.01 (near-uniform initial policy), the critic head 1.
pub const HIDDEN_GAIN: f64 = core::f64::consts::SQRT_2;
pub const ACTOR_HEAD_GAIN: f64 = 0.01;
pub const CRITIC_HEAD_GAIN: f64 = 1.0;

/// Dense `[in, h, h, out]` network. Weight matrices are `rows x cols =
/// layer_out x layer_in`; biases start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpNet {
    pub w: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
}

/// Forward-pass intermediates needed by the backward pass.
pub struct ForwardCache {
    /// Hidden activations after ReLU, one `batch x h` matrix per hidden layer.
    pub hidden: Vec<DMatrix<f64>>,
    /// Network output, `batch x out`.
    pub out: DMatrix<f64>,
}

/// Gradients with the same shapes as the parameters.
pub struct MlpGrads {
    pub w: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
}

/// Draw a `rows x cols` matrix with orthonormal rows or columns (whichever
/// fits), scaled by `gain`, from the QR of a Gaussian matrix with the sign
/// convention that makes the distribution uniform over the orthogonal group.
pub fn orthogonal<R: Rng>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> DMatrix<f64> {
    let (big, small) = (rows.max(cols), rows.min(cols));
    let g = DMatrix::from_fn(big, small, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..small {
        if r[(j, j)] < 0.0 {
            for i in 0..big {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let m = if rows >= cols { q } else { q.transpose() };
    m * gain
}

impl MlpNet {
    /// Fresh network with orthogonally initialized weights (`gains` =
    /// [hidden1, hidden2, head]) and zero biases.
    pub fn new<R: Rng>(sizes: [usize; 4], gains: [f64; 3], rng: &mut R) -> Self {
        let mut w = Vec::with_capacity(3);
        let mut b = Vec::with_capacity(3);
        for l in 0..3 {
            w.push(orthogonal(sizes[l + 1], sizes[l], gains[l], rng));
            b.push(DVector::zeros(sizes[l + 1]));
        }
        MlpNet { w, b }
    }

    pub fn in_dim(&self) -> usize {
        self.w[0].ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w[0].nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.w[2].nrows()
    }

    /// Batch forward pass; `x` is `batch x in_dim`.
    pub fn forward(&self, x: &DMatrix<f64>) -> ForwardCache {
        let mut hidden = Vec::with_capacity(2);
        let mut a = x.clone();
        for l in 0..2 {
            let mut z = &a * self.w[l].transpose();
            for mut row in z.row_iter_mut() {
                row += self.b[l].transpose();
            }
            z.apply(|v| *v = v.max(0.0));
            hidden.push(z.clone());
            a = z;
        }
        let mut out = &a * self.w[2].transpose();
        for mut row in out.row_iter_mut() {
            row += self.b[2].transpose();
        }
        ForwardCache { hidden, out }
    }

    /// Exact gradients for a scalar loss with `d_out = dL/d(out)`.
    pub fn backward(&self, x: &DMatrix<f64>, cache: &ForwardCache, d_out: &DMatrix<f64>) -> MlpGrads {
        let mut gw = vec![DMatrix::zeros(0, 0); 3];
        let mut gb = vec![DVector::zeros(0); 3];
        let mut delta = d_out.clone();
        for l in (0..3).rev() {
            let input = if l == 0 { x } else { &cache.hidden[l - 1] };
            gw[l] = delta.transpose() * input;
            gb[l] = delta.row_sum().transpose();
            if l > 0 {
                // Propagate through the ReLU of the layer below.
                let mut d_prev = &delta * &self.w[l];
                let act = &cache.hidden[l - 1];
                for i in 0..d_prev.nrows() {
                    for j in 0..d_prev.ncols() {
                        if act[(i, j)] <= 0.0 {
                            d_prev[(i, j)] = 0.0;
                        }
                    }
                }
                delta = d_prev;
            }
        }
        MlpGrads { w: gw, b: gb }
    }

    pub fn n_params(&self) -> usize {
        self.w.iter().map(|m| m.len()).sum::<usize>() + self.b.iter().map(|v| v.len()).sum::<usize>()
    }

    /// Append all parameters in layer order (w then b per layer, column-major
    /// within a matrix) — the canonical flattening shared by the optimizer
    /// and the agent file format.
    pub fn write_params(&self, out: &mut Vec<f64>) {
        for l in 0..3 {
            out.extend(self.w[l].iter());
            out.extend(self.b[l].iter());
        }
    }

    /// Inverse of [`write_params`]; consumes exactly `n_params` items.
    pub fn read_params<I: Iterator<Item = f64>>(&mut self, it: &mut I) {
        for l in 0..3 {
            for v in self.w[l].iter_mut() {
                *v = it.next().expect("parameter stream too short");
            }
            for v in self.b[l].iter_mut() {
                *v = it.next().expect("parameter stream too short");
            }
        }
    }
}

impl MlpGrads {
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for l in 0..3 {
            out.extend(self.w[l].iter());
            out.extend(self.b[l].iter());
        }
    }
}
