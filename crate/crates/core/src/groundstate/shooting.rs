//! Shooting on the centre value `Q(0) = s` for
//! `Q'' + (N−1)/r Q' − ωQ + r^b Q^p = 0`, `Q'(0) = 0`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub(crate) const S_MIN: f64 = 1e-6;
pub(crate) const S_MAX: f64 = 1e6;
const BISECTION_RTOL: f64 = 1e-14;
const BISECTION_MAX: usize = 200;
/// Growth past this multiple of `s` counts as undershoot.
const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    /// Crossed zero: `s` too large.
    Overshoot,
    /// Turned back upward (or ran away) while positive: `s` too small.
    Undershoot,
    /// Neither event before the integration limit.
    Undecided,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ode {
    pub dim: f64,
    pub b: f64,
    pub p: f64,
    pub omega: f64,
}

impl Ode {
    #[inline]
    fn accel(&self, r: f64, rb: f64, q: f64, dq: f64) -> f64 {
        -(self.dim - 1.0) / r * dq + self.omega * q - rb * q.abs().powf(self.p - 1.0) * q
    }

    /// Series solution near the origin.
    fn start(&self, s: f64, r: f64) -> (f64, f64) {
        let (n, b, p, w) = (self.dim, self.b, self.p, self.omega);
        let sp = s.powf(p);
        let q = s + r * r * w * s / (2.0 * n) - r.powf(b + 2.0) * sp / ((b + 2.0) * (b + n));
        let dq = r * w * s / n - r.powf(b + 1.0) * sp / (b + n);
        (q, dq)
    }
}

/// Step layout: the ODE step is `h/(2k)` so that node `i` of a grid with
/// spacing `h` sits on step `(2i+1)k`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub step: f64,
    pub per_half_cell: usize,
    pub nodes: usize,
    pub r_max: f64,
}

impl Layout {
    pub fn new(spacing: f64, nodes: usize, r_max: f64) -> Self {
        let target = (1e-3f64).min(spacing / 4.0);
        let k = ((spacing / (2.0 * target)) - 1e-9).ceil().max(2.0) as usize;
        Layout { step: spacing / (2 * k) as f64, per_half_cell: k, nodes, r_max }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Shot {
    pub outcome: Outcome,
    /// Values at the grid nodes reached before the event.
    pub values: Vec<f64>,
}

pub(crate) fn shoot(ode: &Ode, layout: &Layout, s: f64, record: bool) -> Shot {
    let h = layout.step;
    let k = layout.per_half_cell;
    let mut values = Vec::new();
    let (mut q, mut dq) = ode.start(s, h);
    let mut j: usize = 1;
    let mut descending = false;
    let steps = (layout.r_max / h).ceil() as usize;
    let b = ode.b;
    let mut rb = h.powf(b);
    let outcome = loop {
        if record && j % (2 * k) == k {
            let i = j / (2 * k);
            if i < layout.nodes {
                values.push(q);
            }
        }
        if j >= steps {
            break Outcome::Undecided;
        }
        let r = j as f64 * h;
        let rm = r + 0.5 * h;
        let r1 = r + h;
        let rbm = rm.powf(b);
        let rb1 = r1.powf(b);
        let k1q = dq;
        let k1d = ode.accel(r, rb, q, dq);
        let k2q = dq + 0.5 * h * k1d;
        let k2d = ode.accel(rm, rbm, q + 0.5 * h * k1q, k2q);
        let k3q = dq + 0.5 * h * k2d;
        let k3d = ode.accel(rm, rbm, q + 0.5 * h * k2q, k3q);
        let k4q = dq + h * k3d;
        let k4d = ode.accel(r1, rb1, q + h * k3q, k4q);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        dq += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        rb = rb1;
        j += 1;
        if !(q.is_finite() && dq.is_finite()) || q <= 0.0 {
            break Outcome::Overshoot;
        }
        if dq < 0.0 {
            descending = true;
        } else if descending && dq > 0.0 {
            break Outcome::Undershoot;
        }
        if q > BLOWUP_FACTOR * s {
            break Outcome::Undershoot;
        }
    };
    Shot { outcome, values }
}

/// Result of the bisection: the final bracket `lo ≤ s* ≤ hi`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

pub(crate) fn bisect(ode: &Ode, layout: &Layout) -> Result<Bracket> {
    let s0 = ode.omega.powf((2.0 + ode.b) / (2.0 * (ode.p - 1.0))).clamp(S_MIN, S_MAX);
    let classify = |s: f64| shoot(ode, layout, s, false).outcome;
    let (mut lo, mut hi);
    match classify(s0) {
        Outcome::Undecided => return Ok(Bracket { lo: s0, hi: s0 }),
        Outcome::Overshoot => {
            hi = s0;
            lo = s0;
            loop {
                lo *= 0.5;
                if lo < S_MIN {
                    return Err(Error::Bracketing { lo: S_MIN, hi: S_MAX });
                }
                match classify(lo) {
                    Outcome::Overshoot => hi = lo,
                    Outcome::Undershoot => break,
                    Outcome::Undecided => return Ok(Bracket { lo, hi: lo }),
                }
            }
        }
        Outcome::Undershoot => {
            lo = s0;
            hi = s0;
            loop {
                hi *= 2.0;
                if hi > S_MAX {
                    return Err(Error::Bracketing { lo: S_MIN, hi: S_MAX });
                }
                match classify(hi) {
                    Outcome::Undershoot => lo = hi,
                    Outcome::Overshoot => break,
                    Outcome::Undecided => return Ok(Bracket { lo: hi, hi }),
                }
            }
        }
    }
    let mut iterations = 0;
    while hi - lo > BISECTION_RTOL * hi && iterations < BISECTION_MAX {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid) {
            Outcome::Overshoot => hi = mid,
            Outcome::Undershoot => lo = mid,
            Outcome::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    Ok(Bracket { lo, hi })
}

/// Node values of the profile: the two bracketing trajectories averaged up
/// to where they separate, continued by the free decay
/// `Q(r_c) e^{−√ω(r−r_c)} (r_c/r)^{(N−1)/2}` beyond.
pub(crate) fn profile_from_bracket(ode: &Ode, layout: &Layout, nodes: &[f64], bracket: &Bracket) -> Vec<f64> {
    let lo = shoot(ode, layout, bracket.lo, true).values;
    let hi = shoot(ode, layout, bracket.hi, true).values;
    let m = nodes.len();
    let mut out = Vec::with_capacity(m);
    let mut cut = m.min(lo.len()).min(hi.len());
    let mut peaked = false;
    for i in 0..cut {
        let (a, b) = (lo[i], hi[i]);
        if (a - b).abs() > 1e-3 * a.abs().max(b.abs()) {
            cut = i;
            break;
        }
        let v = 0.5 * (a + b);
        if i > 0 && v < out[i - 1] {
            peaked = true;
        } else if peaked && i > 0 && v > out[i - 1] {
            cut = i;
            break;
        }
        out.push(v);
    }
    let cut = cut.max(1).min(out.len());
    out.truncate(cut);
    let (rc, qc) = (nodes[cut - 1], out[cut - 1]);
    let decay = ode.omega.sqrt();
    let geo = (ode.dim - 1.0) / 2.0;
    for &r in &nodes[cut..] {
        out.push(qc * (-decay * (r - rc)).exp() * (rc / r).powf(geo));
    }
    out
}
