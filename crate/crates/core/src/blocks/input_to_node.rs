use crate::base::{Activation, Matrix, Rng};
use crate::blocks::{FanIn, SparseWeights};
use crate::error::{RcnError, Result};

/// Hyperparameters of a random input projection.
#[derive(Clone, Debug, PartialEq)]
pub struct InputToNodeConfig {
    pub hidden_layer_size: usize,
    pub k_in: FanIn,
    pub input_activation: Activation,
    pub input_scaling: f64,
    pub bias_scaling: f64,
    pub seed: u64,
}

impl Default for InputToNodeConfig {
    fn default() -> Self {
        Self {
            hidden_layer_size: 500,
            k_in: FanIn::Count(10),
            input_activation: Activation::Tanh,
            input_scaling: 1.0,
            bias_scaling: 1.0,
            seed: 42,
        }
    }
}

impl InputToNodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layer_size == 0 {
            return Err(RcnError::param("hidden_layer_size", "must be at least 1"));
        }
        self.k_in.validate("k_in")?;
        if !(self.input_scaling.is_finite() && self.input_scaling >= 0.0) {
            return Err(RcnError::param("input_scaling", "must be finite and non-negative"));
        }
        if !(self.bias_scaling.is_finite() && self.bias_scaling >= 0.0) {
            return Err(RcnError::param("bias_scaling", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Fitted input projection `r'[n] = f'(W_in·u[n] + w_bi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputToNodeBlock {
    config: InputToNodeConfig,
    weights: SparseWeights,
    bias: Vec<f64>,
    predefined: bool,
}

impl InputToNodeBlock {
    /// Random initialization seeded from `config.seed`.
    pub fn init(config: InputToNodeConfig, n_in: usize) -> Result<Self> {
        let mut rng = Rng::new(config.seed);
        Self::init_with_rng(config, n_in, &mut rng)
    }

    /// Random initialization drawing from `rng`: the weight rows first (row
    /// 0 first), then the bias vector.
    pub fn init_with_rng(config: InputToNodeConfig, n_in: usize, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if n_in == 0 {
            return Err(RcnError::param("n_in", "input width must be at least 1"));
        }
        let n = config.hidden_layer_size;
        let weights = SparseWeights::random_uniform(n, n_in, config.k_in, config.input_scaling, rng);
        let bias = (0..n).map(|_| rng.symmetric() * config.bias_scaling).collect();
        Ok(Self {
            config,
            weights,
            bias,
            predefined: false,
        })
    }

    /// Block with weights set from outside; they are used verbatim.
    pub fn predefined(weights: SparseWeights, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(RcnError::shape("predefined input weights", "empty weight matrix"));
        }
        if bias.len() != weights.rows() {
            return Err(RcnError::width("predefined input bias", weights.rows(), bias.len()));
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(RcnError::NonFinite("predefined input bias".into()));
        }
        let config = InputToNodeConfig {
            hidden_layer_size: weights.rows(),
            k_in: FanIn::Dense,
            input_activation: activation,
            input_scaling: 1.0,
            bias_scaling: 1.0,
            seed: 0,
        };
        Ok(Self {
            config,
            weights,
            bias,
            predefined: true,
        })
    }

    /// Rebuilds a block from stored parts (used by model files).
    pub fn from_parts(
        config: InputToNodeConfig,
        weights: SparseWeights,
        bias: Vec<f64>,
        predefined: bool,
    ) -> Result<Self> {
        let mut block = Self::predefined(weights, bias, config.input_activation)?;
        if config.hidden_layer_size != block.weights.rows() {
            return Err(RcnError::width(
                "input-to-node hidden_layer_size",
                config.hidden_layer_size,
                block.weights.rows(),
            ));
        }
        block.config = config;
        block.predefined = predefined;
        Ok(block)
    }

    pub fn config(&self) -> &InputToNodeConfig {
        &self.config
    }

    pub fn weights(&self) -> &SparseWeights {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn is_predefined(&self) -> bool {
        self.predefined
    }

    pub fn input_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.rows()
    }

    /// Applies the projection row by row; stateless across rows.
    pub fn transform(&self, u: &Matrix) -> Result<Matrix> {
        if u.cols() != self.input_width() {
            return Err(RcnError::width("input-to-node", self.input_width(), u.cols()));
        }
        let n = self.output_width();
        let act = self.config.input_activation;
        let mut out = Matrix::zeros(u.rows(), n);
        for t in 0..u.rows() {
            let row = out.row_mut(t);
            row.copy_from_slice(&self.bias);
            self.weights.mul_add(u.row(t), row);
            act.apply_in_place(row);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, k: FanIn, a_u: f64, a_b: f64) -> InputToNodeConfig {
        InputToNodeConfig {
            hidden_layer_size: n,
            k_in: k,
            input_activation: Activation::Tanh,
            input_scaling: a_u,
            bias_scaling: a_b,
            seed: 11,
        }
    }

    #[test]
    fn sparse_rows_within_scaling() {
        let b = InputToNodeBlock::init(cfg(50, FanIn::Count(5), 1.0, 0.1), 10).unwrap();
        for i in 0..50 {
            assert_eq!(b.weights().row_nnz(i), 5);
            assert!(b.weights().row(i).1.iter().all(|v| v.abs() <= 1.0));
        }
        assert!(b.bias().iter().all(|v| v.abs() <= 0.1));
        assert!(b.bias().iter().any(|v| *v != 0.0));
    }

    #[test]
    fn dense_saturates_and_zero_scaling_zeroes() {
        let b = InputToNodeBlock::init(cfg(7, FanIn::Dense, 1.0, 0.0), 3).unwrap();
        assert!((0..7).all(|i| b.weights().row_nnz(i) == 3));
        let z = InputToNodeBlock::init(cfg(7, FanIn::Count(2), 0.0, 0.0), 3).unwrap();
        assert!(z.weights().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn output_shape_and_zero_input() {
        let b = InputToNodeBlock::init(cfg(50, FanIn::Count(5), 1.0, 0.1), 10).unwrap();
        let mut rng = Rng::new(3);
        let u = Matrix::new(100, 10, (0..1000).map(|_| rng.normal()).collect()).unwrap();
        assert_eq!(b.transform(&u).unwrap().shape(), (100, 50));
        let zero = b.transform(&Matrix::zeros(4, 10)).unwrap();
        for row in zero.row_iter() {
            for (v, bias) in row.iter().zip(b.bias()) {
                assert_eq!(*v, bias.tanh());
            }
        }
        assert!(b.transform(&Matrix::zeros(4, 9)).is_err());
    }

    #[test]
    fn identity_predefined_passes_input_through() {
        let w = SparseWeights::from_dense(&Matrix::identity(3));
        let b = InputToNodeBlock::predefined(w, vec![0.0; 3], Activation::Identity).unwrap();
        let u = Matrix::from_rows(&[[1.0, -2.0, 3.5], [0.25, 0.0, -1.0]]).unwrap();
        assert_eq!(b.transform(&u).unwrap(), u);
        assert!(InputToNodeBlock::predefined(
            SparseWeights::from_dense(&Matrix::identity(3)),
            vec![0.0; 2],
            Activation::Identity
        )
        .is_err());
    }

    #[test]
    fn same_seed_same_block() {
        let a = InputToNodeBlock::init(cfg(20, FanIn::Count(3), 0.5, 0.2), 6).unwrap();
        let b = InputToNodeBlock::init(cfg(20, FanIn::Count(3), 0.5, 0.2), 6).unwrap();
        assert_eq!(a, b);
    }
}
