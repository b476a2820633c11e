//! Grid certification of the gauge classes Phi1, Psi, Psi1 and H.
//!
//! A `member` verdict records, for every tested grid value, the band bound
//! that worked. A `non_member` verdict always carries a concrete sample.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::gauge::{DomainTag, Gauge};
use crate::grid::{
    band_samples, clamp_open_unit, default_eps_grid, default_r_grid, search_band, ENDPOINT_CLAMP,
    MIN_BAND, TAU_RESOLUTION,
};
use crate::{par, CMP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    Phi1,
    Psi,
    Psi1,
    H,
}

impl ClassTag {
    pub fn from_id(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "phi1" => Some(ClassTag::Phi1),
            "psi" => Some(ClassTag::Psi),
            "psi1" => Some(ClassTag::Psi1),
            "h" | "eta" => Some(ClassTag::H),
            _ => None,
        }
    }

    fn expected_tag(self) -> DomainTag {
        match self {
            ClassTag::Phi1 => DomainTag::PhiStyle,
            ClassTag::Psi | ClassTag::Psi1 => DomainTag::PsiStyle,
            ClassTag::H => DomainTag::EtaStyle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipVerdict {
    Member,
    NonMember,
    Inconclusive,
}

/// A located discontinuity: `left`/`right` are the values on either side of `at`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub size: f64,
    pub left: f64,
    pub right: f64,
}

/// One rejected band bound during the search for rho (or delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandFailure {
    pub bound: f64,
    pub arg: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MembershipWitness {
    /// No band bound survived for this grid value; `failures` follows the bisection.
    Band {
        param: f64,
        failures: Vec<BandFailure>,
    },
    Jump(Jump),
    Decrease {
        a: f64,
        b: f64,
        value_a: f64,
        value_b: f64,
    },
    NotAbove {
        tau: f64,
        value: f64,
    },
    OutOfRange {
        arg: f64,
        message: String,
    },
    Generator {
        check: String,
        tau: f64,
        value: f64,
    },
}

/// Band bound found for one grid value (rho for Psi1, delta for Phi1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBound {
    pub param: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub class_tag: ClassTag,
    pub gauge: String,
    pub verdict: MembershipVerdict,
    pub grid: Vec<f64>,
    pub tau_resolution: f64,
    pub found: Vec<GridBound>,
    pub witness: Option<MembershipWitness>,
    pub note: Option<String>,
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        self.verdict == MembershipVerdict::Member
    }
}

pub fn class_membership_default(g: &Gauge, tag: ClassTag) -> MembershipCertificate {
    let grid = match tag {
        ClassTag::Phi1 => default_eps_grid(),
        _ => default_r_grid(),
    };
    class_membership(g, tag, &grid, TAU_RESOLUTION)
}

pub fn class_membership(
    g: &Gauge,
    tag: ClassTag,
    grid: &[f64],
    tau_resolution: f64,
) -> MembershipCertificate {
    let mut cert = MembershipCertificate {
        class_tag: tag,
        gauge: g.name().to_string(),
        verdict: MembershipVerdict::Inconclusive,
        grid: grid.to_vec(),
        tau_resolution,
        found: Vec::new(),
        witness: None,
        note: None,
    };
    if g.tag() != tag.expected_tag() {
        cert.note = Some(format!(
            "gauge is {:?} but {:?} needs {:?}",
            g.tag(),
            tag,
            tag.expected_tag()
        ));
        return cert;
    }
    if !(tau_resolution > 0.0) || grid.is_empty() {
        cert.note = Some("empty grid or non-positive resolution".into());
        return cert;
    }
    match tag {
        ClassTag::Psi1 => {
            cert.grid = grid.iter().map(|&r| clamp_open_unit(r)).collect();
            band_class(g, &mut cert, psi1_bound);
        }
        ClassTag::Phi1 => {
            if grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
                cert.note = Some("epsilon grid must lie in (0, inf)".into());
                return cert;
            }
            band_class(g, &mut cert, phi1_bound);
        }
        ClassTag::Psi => psi_class(g, &mut cert),
        ClassTag::H => h_class(g, &mut cert),
    }
    if cert.note.is_none() {
        cert.note = Some("grid certificate: tested values only, not a proof".into());
    }
    cert
}

type BoundResult = Result<GridBound, MembershipWitness>;

fn band_class(g: &Gauge, cert: &mut MembershipCertificate, f: fn(&Gauge, f64, f64) -> BoundResult) {
    let res = cert.tau_resolution;
    let results = par::map(&cert.grid, |&p| f(g, p, res));
    let mut found = Vec::new();
    for r in results {
        match r {
            Ok(b) => found.push(b),
            Err(w) => {
                cert.verdict = MembershipVerdict::NonMember;
                cert.witness = Some(w);
                cert.found = found;
                return;
            }
        }
    }
    cert.found = found;
    cert.verdict = MembershipVerdict::Member;
}

/// First sample in `args` failing `ok`, as (arg, value).
fn first_failure(
    g: &Gauge,
    args: &[f64],
    ok: impl Fn(f64) -> bool,
) -> Result<Option<(f64, f64)>, MembershipWitness> {
    for &a in args {
        let v = g.eval(a).map_err(|e| MembershipWitness::OutOfRange {
            arg: a,
            message: e.to_string(),
        })?;
        if !ok(v) {
            return Ok(Some((a, v)));
        }
    }
    Ok(None)
}

/// Bisection for the largest band bound in (lo, hi] with no failing sample.
fn band_search(
    g: &Gauge,
    param: f64,
    lo: f64,
    hi: f64,
    band: impl Fn(f64) -> Vec<f64>,
    ok: impl Fn(f64) -> bool,
) -> BoundResult {
    let failures = RefCell::new(Vec::new());
    let error = RefCell::new(None);
    let valid = |bound: f64| match first_failure(g, &band(bound), &ok) {
        Ok(None) => true,
        Ok(Some((arg, value))) => {
            failures
                .borrow_mut()
                .push(BandFailure { bound, arg, value });
            false
        }
        Err(w) => {
            error.borrow_mut().get_or_insert(w);
            false
        }
    };
    let found = search_band(lo, hi, valid);
    if let Some(w) = error.into_inner() {
        return Err(w);
    }
    match found {
        Some(bound) => Ok(GridBound { param, bound }),
        None => Err(MembershipWitness::Band {
            param,
            failures: failures.into_inner(),
        }),
    }
}

/// rho in (r, 1) with psi(tau) >= 1 - r on the sampled band (1 - rho, 1 - r).
fn psi1_bound(g: &Gauge, r: f64, res: f64) -> BoundResult {
    let target = 1.0 - r;
    band_search(
        g,
        r,
        r,
        1.0 - ENDPOINT_CLAMP,
        |rho| band_samples(1.0 - rho, 1.0 - r, res),
        |v| v >= target - CMP_TOL,
    )
}

/// delta > eps with phi(s) <= eps on the sampled band (eps, delta).
fn phi1_bound(g: &Gauge, eps: f64, res: f64) -> BoundResult {
    band_search(
        g,
        eps,
        eps,
        2.0 * eps + 1.0,
        |delta| band_samples(eps, delta, res),
        |v| v <= eps + CMP_TOL,
    )
}

fn eval_all(g: &Gauge, taus: &[f64]) -> Result<Vec<f64>, MembershipWitness> {
    par::map(taus, |&t| {
        g.eval(t).map_err(|e| MembershipWitness::OutOfRange {
            arg: t,
            message: e.to_string(),
        })
    })
    .into_iter()
    .collect()
}

fn unit_samples(res: f64) -> Vec<f64> {
    let mut taus = band_samples(0.0, 1.0, res);
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}

fn psi_class(g: &Gauge, cert: &mut MembershipCertificate) {
    let taus = unit_samples(cert.tau_resolution);
    let vals = match eval_all(g, &taus) {
        Ok(v) => v,
        Err(w) => return non_member(cert, w),
    };
    for (&t, &v) in taus.iter().zip(&vals) {
        if !g.in_codomain(v) {
            return non_member(
                cert,
                MembershipWitness::OutOfRange {
                    arg: t,
                    message: format!("value {v} outside (0, 1]"),
                },
            );
        }
    }
    for i in 1..taus.len() {
        if vals[i] < vals[i - 1] - CMP_TOL {
            return non_member(
                cert,
                MembershipWitness::Decrease {
                    a: taus[i - 1],
                    b: taus[i],
                    value_a: vals[i - 1],
                    value_b: vals[i],
                },
            );
        }
    }
    if let Some(j) = largest_jump(g, &taus, &vals, cert.tau_resolution) {
        return non_member(cert, MembershipWitness::Jump(j));
    }
    // within MIN_BAND of 1 the gap psi(tau) - tau of a smooth gauge drops below one ulp
    if let Some((&t, &v)) = taus
        .iter()
        .zip(&vals)
        .find(|(&t, &v)| t <= 1.0 - MIN_BAND && !(v > t))
    {
        return non_member(cert, MembershipWitness::NotAbove { tau: t, value: v });
    }
    cert.verdict = MembershipVerdict::Member;
}

/// Adjacent-sample jumps above `10 * res * L`, with L the larger neighbouring
/// slope (zero for step gauges), each refined by bisection. Returns the largest.
fn largest_jump(g: &Gauge, taus: &[f64], vals: &[f64], res: f64) -> Option<Jump> {
    let n = taus.len();
    let slope = |i: usize| (vals[i + 1] - vals[i]).abs() / (taus[i + 1] - taus[i]);
    let step = g.is_step();
    let mut best: Option<Jump> = None;
    for i in 0..n - 1 {
        let jump = (vals[i + 1] - vals[i]).abs();
        if jump <= CMP_TOL {
            continue;
        }
        let lip = if step {
            0.0
        } else {
            let l = if i > 0 { slope(i - 1) } else { 0.0 };
            let r = if i + 2 < n { slope(i + 1) } else { 0.0 };
            l.max(r)
        };
        if jump <= 10.0 * res * lip {
            continue;
        }
        let j = locate_jump(g, taus[i], taus[i + 1]);
        if j.size > CMP_TOL && best.is_none_or(|b| j.size > b.size) {
            best = Some(j);
        }
    }
    best
}

fn locate_jump(g: &Gauge, mut lo: f64, mut hi: f64) -> Jump {
    let ev = |t: f64| g.eval(t).unwrap_or(f64::NAN);
    let (mut vl, mut vh) = (ev(lo), ev(hi));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let vm = ev(mid);
        if (vm - vl).abs() < (vh - vm).abs() {
            lo = mid;
            vl = vm;
        } else {
            hi = mid;
            vh = vm;
        }
    }
    Jump {
        at: hi,
        size: (vh - vl).abs(),
        left: vl,
        right: vh,
    }
}

fn h_class(g: &Gauge, cert: &mut MembershipCertificate) {
    let taus = unit_samples(cert.tau_resolution);
    let vals = match eval_all(g, &taus) {
        Ok(v) => v,
        Err(w) => return non_member(cert, w),
    };
    let gen = |check: &str, tau: f64, value: f64| MembershipWitness::Generator {
        check: check.into(),
        tau,
        value,
    };
    if let Some((&t, &v)) = taus.iter().zip(&vals).find(|(_, &v)| !(v >= 0.0)) {
        return non_member(cert, gen("nonnegative", t, v));
    }
    for i in 1..taus.len() {
        if !(vals[i] < vals[i - 1]) {
            return non_member(
                cert,
                MembershipWitness::Decrease {
                    a: taus[i - 1],
                    b: taus[i],
                    value_a: vals[i - 1],
                    value_b: vals[i],
                },
            );
        }
    }
    let at_one = vals[vals.len() - 1];
    if at_one.abs() > CMP_TOL {
        return non_member(cert, gen("eta(1) = 0", 1.0, at_one));
    }
    // Unboundedness near 0, up to resolution: growth along 2^-k with a floor at 2^-60.
    let mut prev = at_one;
    for k in 1..=60 {
        let t = 0.5f64.powi(k);
        let v = match g.eval(t) {
            Ok(v) => v,
            Err(e) => {
                return non_member(
                    cert,
                    MembershipWitness::OutOfRange {
                        arg: t,
                        message: e.to_string(),
                    },
                )
            }
        };
        if !(v > prev) {
            return non_member(cert, gen("increasing towards 0", t, v));
        }
        prev = v;
    }
    if prev < 40.0 {
        cert.verdict = MembershipVerdict::Inconclusive;
        cert.witness = Some(gen("unbounded towards 0", 0.5f64.powi(60), prev));
        cert.note = Some("generator growth towards 0 too slow to certify at resolution".into());
        return;
    }
    cert.verdict = MembershipVerdict::Member;
}

fn non_member(cert: &mut MembershipCertificate, w: MembershipWitness) {
    cert.verdict = MembershipVerdict::NonMember;
    cert.witness = Some(w);
}
