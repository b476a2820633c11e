use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::grid::parse_number;

/// Which domain/codomain a gauge lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    /// [0, inf) -> [0, inf)
    PhiStyle,
    /// (0, 1] -> (0, 1]
    PsiStyle,
    /// (0, 1] -> [0, inf), strictly decreasing bijection
    EtaStyle,
}

#[derive(Clone)]
pub enum GaugeKind {
    StepPhi,
    StepPsi,
    /// tau^p
    Power(f64),
    /// k * s
    PhiScale(f64),
    Identity,
    /// 1/tau - 1
    EtaReciprocal,
    /// t/tau - t
    EtaReciprocalT(f64),
    /// -ln tau
    EtaNegLog,
    Expr(Arc<Expr>),
    /// `eta^-1 . g . eta` for a phi-style `g`, `eta . g . eta^-1` for a psi-style one.
    Conjugate {
        eta: Generator,
        inner: Box<Gauge>,
    },
    /// Monotone lower step envelope built from (F, E) samples.
    Envelope(Arc<StepEnvelope>),
}

/// A real gauge function with its domain tag and a printable id.
#[derive(Clone)]
pub struct Gauge {
    kind: GaugeKind,
    tag: DomainTag,
    name: String,
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gauge({}, {:?})", self.name, self.tag)
    }
}

/// An eta-style gauge used to move between distance and nearness scales.
#[derive(Clone, Debug)]
pub struct Generator(Box<Gauge>);

impl Generator {
    pub fn new(g: Gauge) -> Result<Self> {
        if g.tag != DomainTag::EtaStyle {
            return Err(Error::Invalid(format!(
                "`{}` is not an eta-style generator",
                g.name
            )));
        }
        Ok(Generator(Box::new(g)))
    }

    pub fn reciprocal() -> Self {
        Generator(Box::new(Gauge::eta_reciprocal()))
    }

    pub fn reciprocal_t(t: f64) -> Self {
        Generator(Box::new(Gauge::eta_reciprocal_t(t)))
    }

    pub fn neglog() -> Self {
        Generator(Box::new(Gauge::eta_neglog()))
    }

    pub fn gauge(&self) -> &Gauge {
        &self.0
    }

    pub fn eval(&self, tau: f64) -> Result<f64> {
        self.0.eval(tau)
    }

    /// eta^-1(s) for s >= 0: closed form for the named generators, bisection otherwise.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "[0, inf)",
            });
        }
        match self.0.kind {
            GaugeKind::EtaReciprocal => Ok(1.0 / (1.0 + s)),
            GaugeKind::EtaReciprocalT(t) => Ok(t / (t + s)),
            GaugeKind::EtaNegLog => Ok((-s).exp()),
            _ => self.bisect_inverse(s),
        }
    }

    fn bisect_inverse(&self, s: f64) -> Result<f64> {
        let (mut lo, mut hi) = (f64::EPSILON, 1.0);
        let (f_lo, f_hi) = (self.eval(lo)?, self.eval(hi)?);
        if !(f_lo > f_hi) {
            return Err(Error::Inversion(format!(
                "`{}` is not strictly decreasing on [eps, 1]",
                self.0.name
            )));
        }
        if s > f_lo || s < f_hi {
            return Err(Error::Inversion(format!(
                "value {s} outside the bracketed range [{f_hi}, {f_lo}] of `{}`",
                self.0.name
            )));
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            let v = self.eval(mid)?;
            if v > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

impl Gauge {
    fn named(kind: GaugeKind, tag: DomainTag, name: impl Into<String>) -> Self {
        Gauge {
            kind,
            tag,
            name: name.into(),
        }
    }

    /// The step gauge on [0, inf).
    pub fn step_phi() -> Self {
        Self::named(GaugeKind::StepPhi, DomainTag::PhiStyle, "step-phi")
    }

    /// The discontinuous step gauge on (0, 1].
    pub fn step_psi() -> Self {
        Self::named(GaugeKind::StepPsi, DomainTag::PsiStyle, "step-psi")
    }

    pub fn power(p: f64) -> Self {
        Self::named(
            GaugeKind::Power(p),
            DomainTag::PsiStyle,
            format!("power:{p}"),
        )
    }

    pub fn phi_scale(k: f64) -> Self {
        Self::named(
            GaugeKind::PhiScale(k),
            DomainTag::PhiStyle,
            format!("phi-scale:{k}"),
        )
    }

    pub fn identity() -> Self {
        Self::named(GaugeKind::Identity, DomainTag::PsiStyle, "identity")
    }

    pub fn eta_reciprocal() -> Self {
        Self::named(
            GaugeKind::EtaReciprocal,
            DomainTag::EtaStyle,
            "eta-reciprocal",
        )
    }

    pub fn eta_reciprocal_t(t: f64) -> Self {
        Self::named(
            GaugeKind::EtaReciprocalT(t),
            DomainTag::EtaStyle,
            format!("eta-reciprocal-t:{t}"),
        )
    }

    pub fn eta_neglog() -> Self {
        Self::named(GaugeKind::EtaNegLog, DomainTag::EtaStyle, "eta-neglog")
    }

    /// Gauge given by an expression in `s` (phi-style) or `tau` (psi/eta-style).
    pub fn expression(src: &str, tag: DomainTag) -> Result<Self> {
        let e = Expr::parse(src)?;
        let var = match tag {
            DomainTag::PhiStyle => "s",
            _ => "tau",
        };
        if let Some(bad) = e.free_vars().into_iter().find(|v| *v != var) {
            return Err(Error::Invalid(format!(
                "gauge expression may only use `{var}`, found `{bad}`"
            )));
        }
        let prefix = match tag {
            DomainTag::PhiStyle => "expr-phi",
            DomainTag::PsiStyle => "expr-psi",
            DomainTag::EtaStyle => "expr-eta",
        };
        Ok(Self::named(
            GaugeKind::Expr(Arc::new(e)),
            tag,
            format!("{prefix}:{src}"),
        ))
    }

    pub fn envelope(env: StepEnvelope, name: impl Into<String>) -> Self {
        Self::named(
            GaugeKind::Envelope(Arc::new(env)),
            DomainTag::PsiStyle,
            name,
        )
    }

    /// Resolve a gauge id such as `step-psi`, `power:5/7` or `conj:eta-reciprocal;step-phi`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        let unknown = || Error::UnknownId {
            kind: "gauge",
            id: id.to_string(),
        };
        if let Some(rest) = id.strip_prefix("conj:") {
            let (eta, inner) = rest.split_once(';').ok_or_else(unknown)?;
            let eta = Generator::new(Gauge::from_id(eta)?)?;
            return Gauge::from_id(inner)?.conjugate(&eta);
        }
        let (head, arg) = match id.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (id, None),
        };
        let num = |a: Option<&str>| a.ok_or_else(unknown).and_then(parse_number);
        match head {
            "step-phi" if arg.is_none() => Ok(Self::step_phi()),
            "step-psi" if arg.is_none() => Ok(Self::step_psi()),
            "identity" if arg.is_none() => Ok(Self::identity()),
            "eta-reciprocal" if arg.is_none() => Ok(Self::eta_reciprocal()),
            "eta-neglog" if arg.is_none() => Ok(Self::eta_neglog()),
            "power" => {
                let p = num(arg)?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::Invalid(format!(
                        "power exponent {p} must lie in (0, 1]"
                    )));
                }
                Ok(Self::power(p))
            }
            "phi-scale" => {
                let k = num(arg)?;
                if !(k > 0.0) {
                    return Err(Error::Invalid(format!("scale {k} must be positive")));
                }
                Ok(Self::phi_scale(k))
            }
            "eta-reciprocal-t" => {
                let t = num(arg)?;
                if !(t > 0.0) {
                    return Err(Error::Invalid(format!("scale t={t} must be positive")));
                }
                Ok(Self::eta_reciprocal_t(t))
            }
            "expr-phi" => Self::expression(arg.ok_or_else(unknown)?, DomainTag::PhiStyle),
            "expr-psi" => Self::expression(arg.ok_or_else(unknown)?, DomainTag::PsiStyle),
            "expr-eta" => Self::expression(arg.ok_or_else(unknown)?, DomainTag::EtaStyle),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tag(&self) -> DomainTag {
        self.tag
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    /// Piecewise-constant gauges whose continuity test skips the slope estimate.
    pub fn is_step(&self) -> bool {
        match &self.kind {
            GaugeKind::StepPhi | GaugeKind::StepPsi | GaugeKind::Envelope(_) => true,
            GaugeKind::Conjugate { inner, .. } => inner.is_step(),
            _ => false,
        }
    }

    pub fn in_domain(&self, v: f64) -> bool {
        match self.tag {
            DomainTag::PhiStyle => v >= 0.0 && v.is_finite(),
            DomainTag::PsiStyle | DomainTag::EtaStyle => v > 0.0 && v <= 1.0,
        }
    }

    pub fn in_codomain(&self, v: f64) -> bool {
        match self.tag {
            DomainTag::PhiStyle | DomainTag::EtaStyle => v >= 0.0 && !v.is_nan(),
            DomainTag::PsiStyle => v > 0.0 && v <= 1.0,
        }
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        if !self.in_domain(v) {
            return Err(Error::Domain {
                what: "gauge argument",
                value: v,
                domain: match self.tag {
                    DomainTag::PhiStyle => "[0, inf)",
                    _ => "(0, 1]",
                },
            });
        }
        Ok(match &self.kind {
            GaugeKind::StepPhi => step_phi(v),
            GaugeKind::StepPsi => step_psi(v),
            GaugeKind::Power(p) => v.powf(*p),
            GaugeKind::PhiScale(k) => k * v,
            GaugeKind::Identity => v,
            GaugeKind::EtaReciprocal => 1.0 / v - 1.0,
            GaugeKind::EtaReciprocalT(t) => t / v - t,
            GaugeKind::EtaNegLog => -v.ln(),
            GaugeKind::Expr(e) => {
                let mut env = Env::default();
                match self.tag {
                    DomainTag::PhiStyle => env.s = Some(v),
                    _ => env.tau = Some(v),
                }
                e.eval(&env)?
            }
            GaugeKind::Conjugate { eta, inner } => match inner.tag {
                DomainTag::PhiStyle => eta.inverse(inner.eval(eta.eval(v)?)?)?,
                _ => eta.eval(inner.eval(eta.inverse(v)?)?)?,
            },
            GaugeKind::Envelope(env) => env.eval(v),
        })
    }

    /// `eta^-1 . self . eta` (phi-style self) or `eta . self . eta^-1` (psi-style self).
    pub fn conjugate(&self, eta: &Generator) -> Result<Gauge> {
        let tag = match self.tag {
            DomainTag::PhiStyle => DomainTag::PsiStyle,
            DomainTag::PsiStyle => DomainTag::PhiStyle,
            DomainTag::EtaStyle => {
                return Err(Error::Invalid("cannot conjugate a generator".into()));
            }
        };
        Ok(Gauge::named(
            GaugeKind::Conjugate {
                eta: eta.clone(),
                inner: Box::new(self.clone()),
            },
            tag,
            format!("conj:{};{}", eta.gauge().name, self.name),
        ))
    }
}

/// phi(0) = 0, phi(s) = 1/(n+1) on (1/(n+1), 1/n], phi(s) = 1 for s > 1.
fn step_phi(s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    if s > 1.0 {
        return 1.0;
    }
    let mut n = (1.0 / s).floor();
    if !n.is_finite() {
        return 0.5 * s;
    }
    for _ in 0..4 {
        if n > 1.0 && 1.0 / n < s {
            n -= 1.0;
        } else if 1.0 / (n + 1.0) >= s {
            n += 1.0;
        } else {
            break;
        }
    }
    1.0 / (n + 1.0)
}

/// psi(tau) = 1/2 below 1/2, (n+1)/(n+2) on [n/(n+1), (n+1)/(n+2)), psi(1) = 1.
///
/// With u = 1 - tau (exact for tau >= 1/2) and m = n + 1 the branch is
/// 1/(m+1) < u <= 1/m, i.e. m = floor(1/u), and psi = 1 - 1/(m+1).
fn step_psi(tau: f64) -> f64 {
    if tau >= 1.0 {
        return 1.0;
    }
    if tau < 0.5 {
        return 0.5;
    }
    let u = 1.0 - tau;
    let mut m = (1.0 / u).floor().max(2.0);
    for _ in 0..4 {
        if m * u > 1.0 {
            m -= 1.0;
        } else if (m + 1.0) * u <= 1.0 {
            m += 1.0;
        } else {
            break;
        }
    }
    1.0 - 1.0 / (m + 1.0)
}

/// psi*(tau) = min { E_i : F_i >= tau }, and 1 where no sample has F >= tau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEnvelope {
    /// Sample F values, ascending.
    pub f: Vec<f64>,
    /// suffix_min[i] = min of E over samples i.. in F order.
    pub suffix_min: Vec<f64>,
}

impl StepEnvelope {
    pub fn from_samples(samples: &[(f64, f64)]) -> Self {
        let mut s: Vec<(f64, f64)> = samples.to_vec();
        s.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let f = s.iter().map(|p| p.0).collect();
        let mut suffix_min = vec![0.0; s.len()];
        let mut m = f64::INFINITY;
        for i in (0..s.len()).rev() {
            m = m.min(s[i].1);
            suffix_min[i] = m;
        }
        StepEnvelope { f, suffix_min }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let idx = self.f.partition_point(|&v| v < tau);
        if idx == self.f.len() {
            1.0
        } else {
            self.suffix_min[idx].min(1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn step_phi_branches() {
        let g = Gauge::step_phi();
        assert!(close(g.eval(0.5).unwrap(), 1.0 / 3.0));
        assert_eq!(g.eval(2.0).unwrap(), 1.0);
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert!(close(g.eval(1.0).unwrap(), 0.5));
        assert!(close(g.eval(0.7).unwrap(), 0.5));
        assert!(close(g.eval(1.0 / 3.0).unwrap(), 0.25));
        assert!(g.eval(-1.0).is_err());
    }

    #[test]
    fn step_psi_branches() {
        let g = Gauge::step_psi();
        assert_eq!(g.eval(0.3).unwrap(), 0.5);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        assert!(close(g.eval(0.5).unwrap(), 2.0 / 3.0));
        assert!(close(g.eval(2.0 / 3.0).unwrap(), 0.75));
        assert!(close(g.eval(0.6).unwrap(), 2.0 / 3.0));
        assert!(close(g.eval(0.9999).unwrap(), 10000.0 / 10001.0));
        assert!(g.eval(0.0).is_err());
        assert!(g.eval(1.5).is_err());
    }

    #[test]
    fn conjugate_step_phi_examples() {
        let psi = Gauge::step_phi()
            .conjugate(&Generator::reciprocal())
            .unwrap();
        assert_eq!(psi.tag(), DomainTag::PsiStyle);
        assert!(close(psi.eval(0.4).unwrap(), 0.5));
        assert!(close(psi.eval(2.0 / 3.0).unwrap(), 0.75));
        assert_eq!(psi.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn analytic_and_bisection_inverses_agree() {
        let named = Generator::reciprocal();
        let expr =
            Generator::new(Gauge::expression("1/tau - 1", DomainTag::EtaStyle).unwrap()).unwrap();
        for s in [0.0, 0.3, 1.0, 7.5, 100.0] {
            let a = named.inverse(s).unwrap();
            let b = expr.inverse(s).unwrap();
            assert!((a - b).abs() < 1e-10, "s={s}: {a} vs {b}");
        }
        let t = Generator::reciprocal_t(2.0);
        assert!(close(t.inverse(t.eval(0.3).unwrap()).unwrap(), 0.3));
        let l = Generator::neglog();
        assert!(close(l.inverse(l.eval(0.3).unwrap()).unwrap(), 0.3));
    }

    #[test]
    fn bisection_inverse_rejects_increasing_generator() {
        let bad = Generator::new(Gauge::expression("tau", DomainTag::EtaStyle).unwrap()).unwrap();
        assert!(matches!(bad.inverse(0.5), Err(Error::Inversion(_))));
    }

    #[test]
    fn ids_resolve() {
        for id in [
            "step-phi",
            "step-psi",
            "power:5/7",
            "eta-reciprocal",
            "eta-reciprocal-t:2",
            "eta-neglog",
            "identity",
            "phi-scale:0.5",
            "expr-psi:tau^(1/2)",
            "conj:eta-reciprocal;step-phi",
        ] {
            let g = Gauge::from_id(id).unwrap();
            assert_eq!(Gauge::from_id(g.name()).unwrap().name(), g.name());
        }
        assert!(Gauge::from_id("power:2").is_err());
        assert!(matches!(
            Gauge::from_id("nope"),
            Err(Error::UnknownId { .. })
        ));
        assert!(Gauge::from_id("expr-psi:x + 1").is_err());
    }

    #[test]
    fn envelope_is_lower_and_monotone() {
        let samples = [(0.2, 0.5), (0.4, 0.45), (0.6, 0.9), (0.9, 0.95)];
        let env = StepEnvelope::from_samples(&samples);
        assert_eq!(env.eval(0.1), 0.45);
        assert_eq!(env.eval(0.5), 0.9);
        assert_eq!(env.eval(0.95), 1.0);
        for &(f, e) in &samples {
            assert!(e >= env.eval(f));
        }
    }
}
