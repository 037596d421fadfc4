use crate::base::{Activation, Matrix, Rng};
use crate::blocks::spectral::spectral_radius;
use crate::blocks::{FanIn, SparseWeights};
use crate::error::{RcnError, Result};

/// Hyperparameters of a recurrent reservoir.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeToNodeConfig {
    pub hidden_layer_size: usize,
    pub k_rec: FanIn,
    pub spectral_radius: f64,
    pub leakage: f64,
    pub reservoir_activation: Activation,
    pub bidirectional: bool,
    pub seed: u64,
}

impl Default for NodeToNodeConfig {
    fn default() -> Self {
        Self {
            hidden_layer_size: 500,
            k_rec: FanIn::Count(10),
            spectral_radius: 1.0,
            leakage: 1.0,
            reservoir_activation: Activation::Tanh,
            bidirectional: false,
            seed: 43,
        }
    }
}

impl NodeToNodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layer_size == 0 {
            return Err(RcnError::param("hidden_layer_size", "must be at least 1"));
        }
        self.k_rec.validate("k_rec")?;
        if !(self.spectral_radius.is_finite() && self.spectral_radius >= 0.0) {
            return Err(RcnError::param("spectral_radius", "must be finite and non-negative"));
        }
        if !(self.leakage > 0.0 && self.leakage <= 1.0) {
            return Err(RcnError::param("leakage", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Fitted reservoir applying the leaky update
/// `r[n] = (1 − λ)·r[n−1] + λ·f(r'[n] + W_res·r[n−1])` from `r[−1] = 0`.
///
/// No transient is discarded; callers drop leading rows themselves when a
/// washout is wanted.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeToNodeBlock {
    config: NodeToNodeConfig,
    weights: SparseWeights,
    predefined: bool,
}

impl NodeToNodeBlock {
    /// Random initialization seeded from `config.seed`.
    pub fn init(config: NodeToNodeConfig) -> Result<Self> {
        let mut rng = Rng::new(config.seed);
        Self::init_with_rng(config, &mut rng)
    }

    /// Draws `k_rec` standard-normal weights per row (self-connections
    /// allowed) and rescales the matrix to the requested spectral radius.
    /// A requested radius of 0 yields an all-zero matrix.
    pub fn init_with_rng(config: NodeToNodeConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        let n = config.hidden_layer_size;
        let raw = SparseWeights::random_normal(n, n, config.k_rec, rng);
        let weights = if config.spectral_radius == 0.0 {
            SparseWeights::zeros(n, n)
        } else {
            let radius = spectral_radius(&raw)?;
            if radius == 0.0 {
                return Err(RcnError::Initialization(
                    "raw reservoir matrix has zero spectral radius".into(),
                ));
            }
            raw.scaled(config.spectral_radius / radius)
        };
        Ok(Self {
            config,
            weights,
            predefined: false,
        })
    }

    /// Block with a reservoir matrix set from outside. The matrix is used
    /// verbatim and never rescaled; `config.spectral_radius` is not
    /// consulted.
    pub fn predefined(
        weights: SparseWeights,
        leakage: f64,
        activation: Activation,
        bidirectional: bool,
    ) -> Result<Self> {
        if !weights.is_square() || weights.rows() == 0 {
            return Err(RcnError::shape(
                "predefined reservoir weights",
                format!("{}x{} is not a non-empty square matrix", weights.rows(), weights.cols()),
            ));
        }
        let config = NodeToNodeConfig {
            hidden_layer_size: weights.rows(),
            k_rec: FanIn::Dense,
            spectral_radius: 0.0,
            leakage,
            reservoir_activation: activation,
            bidirectional,
            seed: 0,
        };
        config.validate()?;
        Ok(Self {
            config,
            weights,
            predefined: true,
        })
    }

    /// Rebuilds a block from stored parts (used by model files).
    pub fn from_parts(config: NodeToNodeConfig, weights: SparseWeights, predefined: bool) -> Result<Self> {
        config.validate()?;
        if !weights.is_square() || weights.rows() != config.hidden_layer_size {
            return Err(RcnError::width(
                "node-to-node weights",
                config.hidden_layer_size,
                weights.rows(),
            ));
        }
        Ok(Self {
            config,
            weights,
            predefined,
        })
    }

    pub fn config(&self) -> &NodeToNodeConfig {
        &self.config
    }

    pub fn weights(&self) -> &SparseWeights {
        &self.weights
    }

    pub fn is_predefined(&self) -> bool {
        self.predefined
    }

    pub fn input_width(&self) -> usize {
        self.config.hidden_layer_size
    }

    pub fn output_width(&self) -> usize {
        if self.config.bidirectional {
            2 * self.config.hidden_layer_size
        } else {
            self.config.hidden_layer_size
        }
    }

    /// Runs the reservoir over one sequence. Bidirectional blocks run a
    /// second pass over the time-reversed input, restore its order and
    /// append it after the forward states.
    pub fn transform(&self, r_in: &Matrix) -> Result<Matrix> {
        if r_in.cols() != self.input_width() {
            return Err(RcnError::width("node-to-node", self.input_width(), r_in.cols()));
        }
        let forward = self.run(r_in);
        if !self.config.bidirectional {
            return Ok(forward);
        }
        let backward = self.run(&r_in.reversed_rows()).reversed_rows();
        Matrix::hstack(&[&forward, &backward])
    }

    fn run(&self, r_in: &Matrix) -> Matrix {
        let n = self.config.hidden_layer_size;
        let lambda = self.config.leakage;
        let keep = 1.0 - lambda;
        let act = self.config.reservoir_activation;
        let mut out = Matrix::zeros(r_in.rows(), n);
        let mut state = vec![0.0; n];
        let mut pre = vec![0.0; n];
        for t in 0..r_in.rows() {
            pre.copy_from_slice(r_in.row(t));
            self.weights.mul_add(&state, &mut pre);
            for (s, &p) in state.iter_mut().zip(&pre) {
                *s = keep * *s + lambda * act.apply(p);
            }
            out.row_mut(t).copy_from_slice(&state);
        }
        out
    }
}
