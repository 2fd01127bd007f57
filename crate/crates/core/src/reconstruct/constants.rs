use serde::Serialize;

use crate::error::{Error, Result};
use crate::monotonicity::{ReconstructionState, Sign};

/// Sign decision for a component of `D_{k+1}` with the margins it rests on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub sign: Sign,
    /// Smallest eigenvalues of the `+` and `−` operators.
    pub margins: [f64; 2],
    /// False when the thinned component was empty and `S±(0)` was used.
    pub linearised: bool,
}

/// One probe of the bisection: value, verdict, smallest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub value: f64,
    pub psd: bool,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub iterations: usize,
    pub probes: Vec<Probe>,
}

pub fn classify_component(state: &ReconstructionState, m0: usize) -> Result<Sign> {
    Ok(classify_component_detailed(state, m0)?.sign)
}

/// Positive iff the `−` test is PSD and the `+` test is not; negative for the mirror.
pub fn classify_component_detailed(
    state: &ReconstructionState,
    m0: usize,
) -> Result<Classification> {
    let d = state.detected().get(m0).ok_or(Error::IndexOutOfRange {
        index: m0,
        len: state.detected().len(),
    })?;
    let core = state.grid().thin_tau(&d.pixels, state.priors().tau);
    let linearised = !core.is_empty();
    let component = m0;
    let (plus, minus) = if linearised {
        (
            state.build_s_tilde(m0, Sign::Plus)?,
            state.build_s_tilde(m0, Sign::Minus)?,
        )
    } else {
        (
            state.build_s(m0, 0.0, Sign::Plus)?,
            state.build_s(m0, 0.0, Sign::Minus)?,
        )
    };
    let label = if linearised { "sign:tilde" } else { "sign:s0" };
    let (plus_ok, plus_margin) = state.test_psd(&plus, component, label, Sign::Plus)?;
    let (minus_ok, minus_margin) = state.test_psd(&minus, component, label, Sign::Minus)?;
    let sign = match (plus_ok, minus_ok) {
        (false, true) => Sign::Plus,
        (true, false) => Sign::Minus,
        _ => {
            return Err(Error::SignAmbiguous {
                component,
                plus: plus_margin,
                minus: minus_margin,
                eps: state.eps(),
            })
        }
    };
    Ok(Classification {
        sign,
        margins: [plus_margin, minus_margin],
        linearised,
    })
}

/// Default bisection tolerance `1e-3 · (β_U − β_L)`.
pub fn default_delta_c(beta_l: f64, beta_u: f64) -> f64 {
    1e-3 * (beta_u - beta_l)
}

pub fn recover_constant(
    state: &ReconstructionState,
    m0: usize,
    sign: Sign,
    delta_c: f64,
) -> Result<f64> {
    Ok(recover_constant_detailed(state, m0, sign, delta_c)?.value)
}

/// Bisection for the switch point of `v ↦ S±(v) ≥ 0`, returning the PSD side.
pub fn recover_constant_detailed(
    state: &ReconstructionState,
    m0: usize,
    sign: Sign,
    delta_c: f64,
) -> Result<ConstantEstimate> {
    if !(delta_c.is_finite() && delta_c > 0.0) {
        return Err(Error::Config(vec![format!(
            "delta_c = {delta_c} must be positive"
        )]));
    }
    let (lo, hi) = state.value_range(m0, sign)?;
    let cap = match sign {
        Sign::Plus => hi,
        Sign::Minus => lo,
    };
    let mut probes = Vec::new();
    let probe = |v: f64, probes: &mut Vec<Probe>| -> Result<bool> {
        let s = state.build_s(m0, v, sign)?;
        let (psd, min_eig) =
            state.test_psd(&s, m0, &format!("s={}", crate::io::fmt_g17(v)), sign)?;
        probes.push(Probe {
            value: v,
            psd,
            min_eig,
        });
        Ok(psd)
    };

    if cap == 0.0 || !probe(cap, &mut probes)? {
        return Err(Error::PriorBoundsViolated {
            component: m0,
            cap,
            margin: probes.last().map_or(f64::NAN, |p| p.min_eig),
        });
    }
    // `good` always satisfies the test, `bad` never.
    let mut good = cap;
    let mut bad = 0.0;
    if probe(bad, &mut probes)? {
        return Err(Error::BracketFailed {
            component: m0,
            lower: lo,
            upper: hi,
        });
    }
    let mut iterations = 0;
    while (good - bad).abs() > delta_c {
        let mid = 0.5 * (good + bad);
        if probe(mid, &mut probes)? {
            good = mid;
        } else {
            bad = mid;
        }
        iterations += 1;
    }
    Ok(ConstantEstimate {
        value: good,
        iterations,
        probes,
    })
}
