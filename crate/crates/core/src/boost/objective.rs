//! Loss functions and their first and second derivatives with respect to the
//! margin.

/// Lower bound on every hessian so leaf denominators stay positive.
pub const HESSIAN_FLOOR: f64 = 1e-16;

#[inline]
pub fn sigmoid(margin: f64) -> f64 {
    if margin >= 0.0 {
        1.0 / (1.0 + (-margin).exp())
    } else {
        let e = margin.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Gradient and hessian of the log-loss at `margin` for a 0/1 label.
#[inline]
pub fn grad_hess_logistic(label: u32, margin: f64) -> (f64, f64) {
    let p = sigmoid(margin);
    let g = p - f64::from(label);
    let h = (p * (1.0 - p)).max(HESSIAN_FLOOR);
    (g, h)
}

/// `-ln p(label)` under the logistic link.
pub fn logistic_loss(label: u32, margin: f64) -> f64 {
    softplus(margin) - f64::from(label) * margin
}

/// Max-shifted softmax written into `out`.
pub fn softmax_into(margins: &[f64], out: &mut [f64]) {
    let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &m) in out.iter_mut().zip(margins) {
        *o = (m - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

pub fn softmax(margins: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; margins.len()];
    softmax_into(margins, &mut out);
    out
}

/// Per-class gradient and diagonal hessian of the softmax cross-entropy,
/// written into `g` and `h`.
pub fn grad_hess_softmax_into(label: u32, margins: &[f64], g: &mut [f64], h: &mut [f64]) {
    softmax_into(margins, g);
    for (k, (gk, hk)) in g.iter_mut().zip(h.iter_mut()).enumerate() {
        let p = *gk;
        *hk = (p * (1.0 - p)).max(HESSIAN_FLOOR);
        if k == label as usize {
            *gk = p - 1.0;
        }
    }
}

pub fn grad_hess_softmax(label: u32, margins: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut g = vec![0.0; margins.len()];
    let mut h = vec![0.0; margins.len()];
    grad_hess_softmax_into(label, margins, &mut g, &mut h);
    (g, h)
}

/// `-ln softmax(margins)[label]`.
pub fn softmax_loss(label: u32, margins: &[f64]) -> f64 {
    let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + margins.iter().map(|m| (m - max).exp()).sum::<f64>().ln();
    lse - margins[label as usize]
}
