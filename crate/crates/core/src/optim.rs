//! Ridge loss and SGD with momentum. Weight decay enters the parameter
//! update as the gradient of the L2 regularizer (2·λ·param), so the stepped
//! objective is exactly the regularized loss reported by
//! [`l2_loss_and_grad`].

use crate::tensor::Map2;

/// Per-parameter-array optimizer state.
#[derive(Debug, Clone)]
pub struct OptState {
    velocity: Vec<f64>,
    pub momentum: f64,
    pub weight_decay: f64,
    pub learning_rate: f64,
}

impl OptState {
    pub fn new(len: usize, momentum: f64, weight_decay: f64, learning_rate: f64) -> Self {
        assert!((0.0..1.0).contains(&momentum), "momentum must lie in [0,1)");
        assert!(weight_decay >= 0.0, "weight decay must be nonnegative");
        assert!(learning_rate > 0.0, "learning rate must be positive");
        OptState { velocity: vec![0.0; len], momentum, weight_decay, learning_rate }
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }
}

/// v ← momentum·v − lr·(grad + 2·weight_decay·param); param ← param + v
pub fn sgd_step(params: &mut [f64], grads: &[f64], opt: &mut OptState) {
    assert_eq!(params.len(), grads.len(), "param/grad length mismatch");
    assert_eq!(params.len(), opt.velocity.len(), "param/velocity length mismatch");
    let lr = opt.learning_rate;
    let m = opt.momentum;
    let wd = opt.weight_decay;
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(opt.velocity.iter_mut()) {
        *v = m * *v - lr * (g + 2.0 * wd * *p);
        *p += *v;
    }
}

/// Squared-error loss with an L2 penalty over the supplied parameter arrays:
/// loss = Σ(response − label)² + weight_decay·ΣΣ param². The returned
/// gradient covers only the response term, 2·(response − label); the
/// regularizer's parameter gradient is applied inside [`sgd_step`].
pub fn l2_loss_and_grad(
    response: &Map2,
    label: &Map2,
    params: &[&[f64]],
    weight_decay: f64,
) -> (f64, Map2) {
    assert_eq!(
        (response.height(), response.width()),
        (label.height(), label.width()),
        "response/label shape mismatch"
    );
    let mut loss = 0.0;
    let mut grad = Map2::zeros(response.height(), response.width());
    for ((g, &r), &y) in grad.data_mut().iter_mut().zip(response.data()).zip(label.data()) {
        let d = r - y;
        loss += d * d;
        *g = 2.0 * d;
    }
    if weight_decay != 0.0 {
        let mut reg = 0.0;
        for arr in params {
            reg += arr.iter().map(|p| p * p).sum::<f64>();
        }
        loss += weight_decay * reg;
    }
    (loss, grad)
}
