//! M/H2/1 switch queue.
//!
//! Each packet at a switch is served in one of two exponential phases: the
//! packet-in phase (rate `mu1`, taken with probability `p_packet_in`) or the
//! direct-forward phase (rate `mu2`). The queue is a quasi-birth-death process
//! whose levels count packets in the switch and whose phases record the class
//! of the packet in service:
//!
//! ```text
//!   level 0:   (0)                     one state, server idle
//!   level k:   (k,1) (k,2)   k >= 1    phase of the packet in service
//!
//!   arrival      (k,i) -> (k+1,i)      rate λ            A0 = λ·I
//!   completion   (k,i) -> (k-1,j)      rate μ_i·β_j      A2 = μ·βᵀ
//!   idle arrival (0)   -> (1,j)        rate λ·β_j
//!   last service (1,i) -> (0)          rate μ_i
//! ```
//!
//! with `β = (p, 1-p)`. The stationary vector is matrix-geometric,
//! `π_k = π_1·R^{k-1}` for `k >= 1`, where `R` is the minimal nonnegative
//! solution of `R²·A2 + R·A1 + A0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Mat2, Vec2};

/// Loads within this distance of 1 are rejected as unstable.
pub const STABILITY_GUARD: f64 = 1e-9;

/// Successive-iterate tolerance for the rate matrix.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Two-phase hyperexponential service law of one switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperExpService {
    /// Probability that a packet misses the flow table and is sent to the
    /// controller.
    pub p_packet_in: f64,
    /// Service rate of packet-in packets (packets/s).
    pub mu1: f64,
    /// Service rate of directly forwarded packets (packets/s).
    pub mu2: f64,
}

impl HyperExpService {
    pub fn new(p_packet_in: f64, mu1: f64, mu2: f64) -> Result<Self> {
        let svc = Self {
            p_packet_in,
            mu1,
            mu2,
        };
        svc.check()?;
        Ok(svc)
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_packet_in) {
            return Err(Error::InvalidParameter {
                name: "p_packet_in",
                value: self.p_packet_in,
                reason: "probability out of range [0, 1]",
            });
        }
        for (name, value) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "service rate must be finite and > 0",
                });
            }
        }
        Ok(())
    }

    /// Phase-selection probabilities `β = (p, 1-p)`.
    pub fn phase_mix(&self) -> Vec2 {
        Vec2::new(self.p_packet_in, 1.0 - self.p_packet_in)
    }

    pub fn rates(&self) -> Vec2 {
        Vec2::new(self.mu1, self.mu2)
    }

    pub fn mean_service_time(&self) -> f64 {
        self.p_packet_in / self.mu1 + (1.0 - self.p_packet_in) / self.mu2
    }

    /// `E[S²]`; each exponential phase contributes `2/μ²`.
    pub fn second_moment(&self) -> f64 {
        2.0 * self.p_packet_in / (self.mu1 * self.mu1)
            + 2.0 * (1.0 - self.p_packet_in) / (self.mu2 * self.mu2)
    }

    pub fn utilization(&self, lambda: f64) -> f64 {
        lambda * self.mean_service_time()
    }
}

/// Generator blocks of the switch QBD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbdBlocks {
    pub lambda: f64,
    pub service: HyperExpService,
    /// Level up (arrival).
    pub a0: Mat2,
    /// Local transitions within a level `k >= 1`.
    pub a1: Mat2,
    /// Level down (service completion followed by phase selection).
    pub a2: Mat2,
    /// Diagonal of the empty state.
    pub boundary_b00: f64,
    /// Empty state to level 1.
    pub boundary_b01: Vec2,
    /// Level 1 to the empty state, as a column.
    pub boundary_b10: Vec2,
}

impl QbdBlocks {
    /// Row sums of the generator for the empty state, level 1 and any level
    /// `k >= 2`, in that order. All are zero for a conservative generator.
    pub fn generator_row_sums(&self) -> (f64, Vec2, Vec2) {
        let empty = self.boundary_b00 + self.boundary_b01.sum();
        let a0 = self.a0.row_sums();
        let a1 = self.a1.row_sums();
        let a2 = self.a2.row_sums();
        let b10 = self.boundary_b10;
        let level1 = Vec2([
            b10.0[0] + a1.0[0] + a0.0[0],
            b10.0[1] + a1.0[1] + a0.0[1],
        ]);
        let repeating = Vec2([
            a2.0[0] + a1.0[0] + a0.0[0],
            a2.0[1] + a1.0[1] + a0.0[1],
        ]);
        (empty, level1, repeating)
    }

    /// `‖R²·A2 + R·A1 + A0‖_max`.
    pub fn residual(&self, r: &Mat2) -> f64 {
        (*r * *r * self.a2 + *r * self.a1 + self.a0).max_abs()
    }
}

/// Builds the QBD blocks for a switch with arrival rate `lambda`.
pub fn build_qbd_blocks(svc: &HyperExpService, lambda: f64) -> Result<QbdBlocks> {
    svc.check()?;
    check_arrival_rate(lambda)?;
    let beta = svc.phase_mix();
    let mu = svc.rates();

    let mut a2 = Mat2::ZERO;
    for i in 0..2 {
        a2.0[i][0] = mu.0[i] * beta.0[0];
        // Complement keeps the row sum equal to μ_i.
        a2.0[i][1] = mu.0[i] - a2.0[i][0];
    }
    let mut b01 = beta.scale(lambda);
    b01.0[1] = lambda - b01.0[0];

    Ok(QbdBlocks {
        lambda,
        service: *svc,
        a0: Mat2::diag(lambda, lambda),
        a1: Mat2::diag(-(lambda + svc.mu1), -(lambda + svc.mu2)),
        a2,
        boundary_b00: -lambda,
        boundary_b01: b01,
        boundary_b10: mu,
    })
}

/// Minimal nonnegative solution of `R²·A2 + R·A1 + A0 = 0`.
///
/// Uses the fixed point `R ← -(A0 + R²·A2)·A1⁻¹` from `R = 0`, which increases
/// monotonically to the minimal solution. Converged once successive iterates
/// differ by at most `tol` (max norm) and the quadratic residual is within
/// `tol·‖A0‖_max`; iteration then continues until the iterates stop moving.
pub fn solve_rate_matrix(blocks: &QbdBlocks, tol: f64, max_iter: usize) -> Result<Mat2> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be > 0",
        });
    }
    check_stable(blocks.service.utilization(blocks.lambda))?;

    let a1_inv = blocks.a1.inverse()?;
    let residual_bound = tol * blocks.a0.max_abs();
    let mut r = Mat2::ZERO;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = -((blocks.a0 + r * r * blocks.a2) * a1_inv);
        let step = (next - r).max_abs();
        let increasing = (0..4).any(|k| next.0[k / 2][k % 2] > r.0[k / 2][k % 2]);
        r = next;
        if !converged {
            converged = step <= tol && blocks.residual(&r) <= residual_bound;
        }
        // Once within tolerance, run on until the monotone sequence stops
        // increasing in floating point: near saturation the contraction
        // factor approaches 1 and the remaining error is step/(1 - factor).
        if converged && !increasing {
            return Ok(r);
        }
    }
    if converged {
        return Ok(r);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: blocks.residual(&r),
    })
}

/// Stationary distribution of the switch queue in matrix-geometric form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDistribution {
    /// Probability that the switch is empty.
    pub pi0: f64,
    /// Phase-resolved probabilities of level 1.
    pub pi1: Vec2,
    pub rate_matrix_r: Mat2,
    pub spectral_radius_r: f64,
}

impl StationaryDistribution {
    /// `π_0 + π_1·(I-R)⁻¹·1`.
    pub fn total_mass(&self) -> Result<f64> {
        let fundamental = (Mat2::IDENTITY - self.rate_matrix_r).inverse()?;
        Ok(self.pi0 + self.pi1.mul_mat(&fundamental).sum())
    }

    /// Phase vector `π_k`; level 0 is reported as `(π_0, 0)`.
    pub fn level_vector(&self, k: usize) -> Vec2 {
        if k == 0 {
            return Vec2::new(self.pi0, 0.0);
        }
        let mut v = self.pi1;
        for _ in 1..k {
            v = v.mul_mat(&self.rate_matrix_r);
        }
        v
    }

    /// Probability of exactly `k` packets in the switch.
    pub fn level_probability(&self, k: usize) -> f64 {
        self.level_vector(k).sum()
    }

    /// `E[N] = Σ k·π_1·R^{k-1}·1 = π_1·(I-R)⁻²·1`.
    pub fn mean_level(&self) -> Result<f64> {
        let fundamental = (Mat2::IDENTITY - self.rate_matrix_r).inverse()?;
        Ok(self.pi1.mul_mat(&(fundamental * fundamental)).sum())
    }
}

/// Utilization, mean occupancy and mean sojourn time of a solved queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueMetrics {
    pub utilization: f64,
    pub mean_queue_len: f64,
    pub mean_sojourn_s: f64,
}

impl QueueMetrics {
    /// Sojourn time follows from Little's law.
    pub fn from_queue_len(utilization: f64, mean_queue_len: f64, lambda: f64) -> Self {
        Self {
            utilization,
            mean_queue_len,
            mean_sojourn_s: mean_queue_len / lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchSolution {
    pub distribution: StationaryDistribution,
    pub metrics: QueueMetrics,
}

/// Solves the M/H2/1 queue by the matrix-geometric method.
pub fn solve_switch_queue(svc: &HyperExpService, lambda: f64) -> Result<SwitchSolution> {
    let blocks = build_qbd_blocks(svc, lambda)?;
    let utilization = svc.utilization(lambda);
    check_stable(utilization)?;
    let r = solve_rate_matrix(&blocks, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;

    // Level-1 balance: π_0·B01 + π_1·(A1 + R·A2) = 0 with π_0 = π_1·B10/λ,
    // and since B10·β = A2 this is π_1·(A1 + (I+R)·A2) = 0. The matrix is
    // singular; keep its better-conditioned column and replace the other
    // equation with normalization π_1·(B10/λ + (I-R)⁻¹·1) = 1.
    let balance = blocks.a1 + (Mat2::IDENTITY + r) * blocks.a2;
    let col = |c: usize| Vec2::new(balance.0[0][c], balance.0[1][c]);
    let (c0, c1) = (col(0), col(1));
    let kept = if c0.dot(&c0) >= c1.dot(&c1) { c0 } else { c1 };

    let fundamental = (Mat2::IDENTITY - r).inverse()?;
    let norm = blocks.boundary_b10.scale(1.0 / lambda);
    let norm = Vec2([
        norm.0[0] + fundamental.mul_vec(&Vec2::ONES).0[0],
        norm.0[1] + fundamental.mul_vec(&Vec2::ONES).0[1],
    ]);
    // π_1·[kept | norm] = (0, 1)
    let system = Mat2::new(kept.0[0], norm.0[0], kept.0[1], norm.0[1]);
    let inv = system.inverse()?;
    let pi1 = Vec2::new(inv.0[1][0], inv.0[1][1]);
    let pi0 = pi1.dot(&blocks.boundary_b10) / lambda;

    let distribution = StationaryDistribution {
        pi0,
        pi1,
        rate_matrix_r: r,
        spectral_radius_r: r.spectral_radius(),
    };
    let mean_queue_len = distribution.mean_level()?;
    Ok(SwitchSolution {
        distribution,
        metrics: QueueMetrics::from_queue_len(utilization, mean_queue_len, lambda),
    })
}

/// Mean-value solution of the same queue through the Pollaczek–Khinchine
/// formula for M/G/1, `E[N] = u + λ²·E[S²] / (2(1-u))`.
pub fn pollaczek_khinchine_mean(svc: &HyperExpService, lambda: f64) -> Result<QueueMetrics> {
    svc.check()?;
    check_arrival_rate(lambda)?;
    let u = svc.utilization(lambda);
    check_stable(u)?;
    let en = u + lambda * lambda * svc.second_moment() / (2.0 * (1.0 - u));
    Ok(QueueMetrics::from_queue_len(u, en, lambda))
}

fn check_arrival_rate(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "arrival rate must be finite and > 0",
        })
    }
}

pub(crate) fn check_stable(utilization: f64) -> Result<()> {
    if utilization < 1.0 - STABILITY_GUARD {
        Ok(())
    } else {
        Err(Error::UnstableSwitch {
            index: None,
            utilization,
        })
    }
}
