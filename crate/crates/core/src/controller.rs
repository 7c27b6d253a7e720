//! M/M/1 model of the controller's packet-in queue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::switch_queue::QueueMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    /// Packet-in service rate (messages/s), including the switch-to-controller
    /// transmission time.
    pub mu_c: f64,
}

impl ControllerParams {
    pub fn new(mu_c: f64) -> Result<Self> {
        let params = Self { mu_c };
        params.check()?;
        Ok(params)
    }

    pub fn check(&self) -> Result<()> {
        if self.mu_c > 0.0 && self.mu_c.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "mu_c",
                value: self.mu_c,
                reason: "controller service rate must be finite and > 0",
            })
        }
    }

    pub fn utilization(&self, lambda_c: f64) -> f64 {
        lambda_c / self.mu_c
    }

    fn check_load(&self, lambda_c: f64) -> Result<()> {
        self.check()?;
        if !(lambda_c >= 0.0 && lambda_c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "lambda_c",
                value: lambda_c,
                reason: "packet-in rate must be finite and >= 0",
            });
        }
        if lambda_c >= self.mu_c {
            return Err(Error::UnstableController {
                lambda_c,
                mu_c: self.mu_c,
            });
        }
        Ok(())
    }
}

/// `E[N_c] = λ_c / (μ_c - λ_c)`.
pub fn controller_mean_queue(params: &ControllerParams, lambda_c: f64) -> Result<f64> {
    params.check_load(lambda_c)?;
    Ok(lambda_c / (params.mu_c - lambda_c))
}

/// `E[T_c] = 1 / (μ_c - λ_c)`.
pub fn controller_mean_sojourn(params: &ControllerParams, lambda_c: f64) -> Result<f64> {
    params.check_load(lambda_c)?;
    Ok(1.0 / (params.mu_c - lambda_c))
}

pub fn controller_metrics(params: &ControllerParams, lambda_c: f64) -> Result<QueueMetrics> {
    Ok(QueueMetrics {
        utilization: params.utilization(lambda_c),
        mean_queue_len: controller_mean_queue(params, lambda_c)?,
        mean_sojourn_s: controller_mean_sojourn(params, lambda_c)?,
    })
}
