use super::tensor::{Scalar, Tensor};
use super::NnError;

/// Adam optimizer state with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T = f32> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Steps taken so far.
    pub t: u64,
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
}

impl<T: Scalar> Default for AdamState<T> {
    fn default() -> Self {
        AdamState::new(1e-3, 0.9, 0.999, 1e-8).expect("default hyper-parameters are valid")
    }
}

impl<T: Scalar> AdamState<T> {
    pub fn new(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<Self, NnError> {
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return Err(NnError::Optimizer(format!(
                "betas must lie in [0, 1), got {beta1}, {beta2}"
            )));
        }
        if !(eps > 0.0) || !(lr > 0.0) {
            return Err(NnError::Optimizer("lr and eps must be positive".into()));
        }
        Ok(AdamState {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        })
    }

    /// One update over `params` in place. Moments are allocated on the first
    /// step; later steps must present the same shapes in the same order.
    pub fn step<'a, I>(&mut self, params: I, grads: &[Tensor<T>]) -> Result<(), NnError>
    where
        I: IntoIterator<Item = &'a mut Tensor<T>>,
    {
        let params: Vec<&mut Tensor<T>> = params.into_iter().collect();
        if params.len() != grads.len() {
            return Err(NnError::Shape(format!(
                "adam: {} parameter tensors, {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (p, g) in params.iter().zip(grads) {
            if p.dims() != g.dims() {
                return Err(NnError::Shape(format!(
                    "adam: parameter {:?} vs gradient {:?}",
                    p.dims(),
                    g.dims()
                )));
            }
        }
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| Tensor::zeros(g.dims())).collect();
            self.v = self.m.clone();
        } else if self.m.len() != grads.len() || self.m.iter().zip(grads).any(|(m, g)| m.dims() != g.dims()) {
            return Err(NnError::Shape("adam: gradient shapes changed between steps".into()));
        }

        self.t += 1;
        let b1 = T::from_f64(self.beta1);
        let b2 = T::from_f64(self.beta2);
        let one = T::one();
        let bias1 = T::from_f64(1.0 - self.beta1.powi(self.t as i32));
        let bias2 = T::from_f64(1.0 - self.beta2.powi(self.t as i32));
        let lr = T::from_f64(self.lr);
        let eps = T::from_f64(self.eps);

        for ((p, g), (m, v)) in params
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (((theta, &gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mi = b1 * *mi + (one - b1) * gi;
                *vi = b2 * *vi + (one - b2) * gi * gi;
                let m_hat = *mi / bias1;
                let v_hat = *vi / bias2;
                *theta = *theta - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Applies one Adam step to `params`.
pub fn adam_step<T: Scalar>(
    params: &mut [Tensor<T>],
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
) -> Result<(), NnError> {
    state.step(params.iter_mut(), grads)
}
