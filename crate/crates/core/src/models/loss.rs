use super::config::{LossKind, ModelConfig};

#[inline]
fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

/// Limit-based loss over whole score lists:
/// `beta1 * sum [f(pos) - gamma1]_+ + beta2 * sum [gamma2 - f(neg)]_+`.
pub fn loss_limit(positive: &[f64], negative: &[f64], config: &ModelConfig) -> f64 {
    config.beta1 * positive.iter().map(|&s| hinge(s - config.gamma1)).sum::<f64>()
        + config.beta2 * negative.iter().map(|&s| hinge(config.gamma2 - s)).sum::<f64>()
}

/// Margin ranking loss `max(0, margin + f(pos) - f(neg))`.
pub fn loss_margin(positive: f64, negative: f64, config: &ModelConfig) -> f64 {
    hinge(config.margin + positive - negative)
}

/// Loss of one positive and its negatives under the configured loss kind.
/// For the margin loss every negative forms a pair with the positive.
pub fn sample_loss(positive: f64, negatives: &[f64], config: &ModelConfig) -> f64 {
    match config.loss {
        LossKind::Margin => negatives.iter().map(|&n| loss_margin(positive, n, config)).sum(),
        LossKind::Limit => loss_limit(&[positive], negatives, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limit() -> ModelConfig {
        ModelConfig::mde()
    }

    #[test]
    fn limit_arithmetic() {
        assert_eq!(loss_limit(&[2.0], &[2.0], &limit()), 1.0);
        assert_eq!(loss_limit(&[5.0], &[10.0], &limit()), 2.0);
        assert_eq!(loss_limit(&[3.0], &[3.0], &limit()), 0.0);
    }

    #[test]
    fn limit_betas_scale_terms() {
        let c = ModelConfig {
            beta1: 2.0,
            beta2: 0.5,
            ..limit()
        };
        assert_eq!(loss_limit(&[4.0, 5.0], &[1.0], &c), 2.0 * 3.0 + 0.5 * 2.0);
    }

    #[test]
    fn margin_arithmetic() {
        let c = ModelConfig::transe();
        assert_eq!(loss_margin(0.5, 2.0, &c), 0.0);
        assert_eq!(loss_margin(2.0, 0.5, &c), 2.5);
        assert_eq!(loss_margin(2.0, 2.0, &c), 1.0);
    }

    #[test]
    fn sample_loss_dispatch() {
        let mut c = ModelConfig::transe();
        assert_eq!(sample_loss(2.0, &[0.5, 5.0], &c), 2.5);
        c.loss = LossKind::Limit;
        assert_eq!(sample_loss(2.0, &[0.5, 5.0], &c), 2.5);
    }
}
