//! Constructors for the demand zoo.

use super::audit::{grid_range, holder_constant, largest_power_of_two};
use super::model::{DemandModel, SelfSimParams, AUDIT_GRID};
use super::shapes::{BumpG, Psi, Shape};
use crate::error::{domain, Error, Result};
use crate::numerics::jet::{Jet, Real};
use crate::numerics::selfsim::{largest_passing_m2, selfsim_deficit};
use crate::policies::holder_degree;

/// Factor applied to grid estimates of Hölder constants, which can only
/// undershoot the true constant.
pub const AUDIT_MARGIN: f64 = 1.25;
const HOLDER_GRID: usize = 4001;
/// Self-similarity parameters are fitted over scales `3..=7`.
const SELFSIM_M1: f64 = 2.0;
const SELFSIM_MAX_SCALE: u32 = 7;

pub const BUMP_P_MIN: f64 = 0.5;
pub const BUMP_D_MAX: f64 = 2.0;
pub const BUMP_DEFAULT_L: f64 = 1.0;

fn shape_jet(shape: &Shape) -> impl Fn(Jet) -> Jet + '_ {
    move |x| shape.eval(x).expect("closed-form shape")
}

fn audited_lipschitz(shape: &Shape, beta: f64, p_min: f64, points: usize) -> f64 {
    holder_constant(shape_jet(shape), beta, p_min, 1.0, points) * AUDIT_MARGIN
}

fn fitted_selfsim<F: Fn(f64) -> f64>(
    f: F,
    beta: f64,
    anchor: f64,
) -> Result<Option<SelfSimParams>> {
    let degree = holder_degree(beta)?;
    let first = SELFSIM_M1 as u32 + 1;
    let deficits = (first..=SELFSIM_MAX_SCALE)
        .map(|c| Ok((c, selfsim_deficit(&f, degree, c, anchor)?)))
        .collect::<Result<Vec<_>>>()?;
    let m2 = largest_passing_m2(&deficits, beta);
    Ok((m2 > 0.0 && m2.is_finite()).then_some(SelfSimParams {
        degree,
        m1: SELFSIM_M1,
        m2,
    }))
}

fn check_p_min(p_min: f64) -> Result<()> {
    if !(p_min > 0.0 && p_min < 1.0) {
        return Err(domain(format!("p_min={p_min} must lie in (0, 1)")));
    }
    Ok(())
}

/// `offset + base_slope (p - p_min) + c0 (p - p_min)^beta`, shifted so that
/// its range is centred in `[0.1 d_max, 0.9 d_max]`.
///
/// With `c0 != 0` the model carries fitted self-similarity parameters of
/// degree `w(beta)`; the affine member `c0 = 0` claims none.
pub fn make_power_selfsim(
    c0: f64,
    beta: f64,
    base_slope: f64,
    p_min: f64,
    d_max: f64,
) -> Result<DemandModel> {
    check_p_min(p_min)?;
    if !(beta > 0.0) {
        return Err(domain(format!("beta={beta} must be positive")));
    }
    if c0 != 0.0 && c0.abs() < base_slope.abs() {
        return Err(domain(format!(
            "|c0|={} must dominate the base slope bound {}",
            c0.abs(),
            base_slope.abs()
        )));
    }
    let raw = Shape::Power {
        offset: 0.0,
        slope: base_slope,
        c0,
        beta,
        origin: p_min,
    };
    let (lo, hi) = grid_range(|p| raw.value(p), p_min, 1.0, AUDIT_GRID);
    if hi - lo > 0.8 * d_max {
        return Err(Error::Construction(format!(
            "power model spans {} which does not fit in [0.1, 0.9] * d_max = {d_max}",
            hi - lo
        )));
    }
    let shape = Shape::Power {
        offset: 0.5 * d_max - 0.5 * (lo + hi),
        slope: base_slope,
        c0,
        beta,
        origin: p_min,
    };
    let lipschitz = audited_lipschitz(&shape, beta, p_min, HOLDER_GRID);
    let model = DemandModel::new("power_selfsim", shape, beta, lipschitz, p_min, d_max)?;
    let selfsim = if c0 != 0.0 {
        fitted_selfsim(|p| model.demand(p), beta, p_min)?
    } else {
        None
    };
    Ok(model.with_selfsim(selfsim))
}

/// Grid Hölder constant of the bump `g` with `c1 = 1`; the constant is
/// linear in `c1`.
fn bump_holder(beta: f64, c1: f64) -> f64 {
    let g = BumpG { beta, c1 };
    holder_constant(|x| g.eval(x), beta, 0.0, 1.0, HOLDER_GRID)
}

/// Largest `c1 = 2^-k` for which the bump passes the range audit
/// (`g <= 1`) and the Hölder audit `(beta, L)` on `[0, 1]`.
pub fn bump_c1(beta: f64, lipschitz: f64) -> Result<f64> {
    if !(beta > 0.0 && lipschitz > 0.0) {
        return Err(domain(format!(
            "need beta > 0 and L > 0, got {beta}, {lipschitz}"
        )));
    }
    largest_power_of_two(0, |c1| {
        0.5 * c1 <= 1.0 && bump_holder(beta, c1) <= lipschitz
    })
    .ok_or_else(|| Error::Construction(format!("no admissible c1 for beta={beta}, L={lipschitz}")))
}

/// The bump model on the default domain `[0.5, 1]` with `d_max = 2`.
pub fn make_bump_g(beta: f64, lipschitz: f64, c1: f64) -> Result<DemandModel> {
    make_bump_g_on(beta, lipschitz, c1, BUMP_P_MIN, BUMP_D_MAX)
}

/// Demand `(1/2 + g((p - p_min) / (1 - p_min))) / p`: the revenue is `1/2`
/// plus the bump rescaled to `[p_min, 1]`, so its unique maximizer is the
/// midpoint of the domain.
pub fn make_bump_g_on(
    beta: f64,
    lipschitz: f64,
    c1: f64,
    p_min: f64,
    d_max: f64,
) -> Result<DemandModel> {
    check_p_min(p_min)?;
    if !(c1 > 0.0) {
        return Err(domain(format!("c1={c1} must be positive")));
    }
    if !(beta > 0.0) {
        return Err(domain(format!("beta={beta} must be positive")));
    }
    let audit = bump_holder(beta, c1);
    if audit > lipschitz {
        return Err(Error::Construction(format!(
            "bump with c1={c1} has Hölder constant {audit} > L={lipschitz}"
        )));
    }
    let g = BumpG { beta, c1 };
    let shape = Shape::RevenueBump {
        base: 0.5,
        amplitude: 1.0,
        start: p_min,
        width: 1.0 - p_min,
        g,
    };
    let model_l = audited_lipschitz(&shape, beta, p_min, HOLDER_GRID);
    let model = DemandModel::new("bump_g", shape, beta, model_l, p_min, d_max)?
        .with_maximizers(vec![p_min + 0.5 * (1.0 - p_min)]);
    let selfsim = fitted_selfsim(|p| model.demand(p), beta, p_min)?;
    Ok(model.with_selfsim(selfsim))
}

/// Member `j` of the lower-bound family with `c1` from [`bump_c1`] at
/// [`BUMP_DEFAULT_L`] and `d_max = 1 / p_min`.
pub fn make_lowerbound_family(
    j: usize,
    cells: usize,
    beta: f64,
    p_min: f64,
) -> Result<DemandModel> {
    let c1 = bump_c1(beta, BUMP_DEFAULT_L)?;
    make_lowerbound_family_with(j, cells, beta, p_min, c1, 1.0 / p_min)
}

/// `f_j(p) = 1/(2p) + eps^beta g((p - a_j) / eps) / p` with
/// `eps = (1 - p_min) / J` and `a_j = p_min + (j - 1) eps`; `f_0 = 1/(2p)`.
pub fn make_lowerbound_family_with(
    j: usize,
    cells: usize,
    beta: f64,
    p_min: f64,
    c1: f64,
    d_max: f64,
) -> Result<DemandModel> {
    check_p_min(p_min)?;
    if cells == 0 {
        return Err(domain("the family needs J >= 1 cells"));
    }
    if j > cells {
        return Err(domain(format!("member j={j} out of range 0..={cells}")));
    }
    if !(beta > 0.0 && c1 > 0.0) {
        return Err(domain(format!(
            "need beta > 0 and c1 > 0, got {beta}, {c1}"
        )));
    }
    let eps = (1.0 - p_min) / cells as f64;
    let (start, amplitude, peak) = if j == 0 {
        (p_min, 0.0, p_min)
    } else {
        let a_j = p_min + (j - 1) as f64 * eps;
        (a_j, eps.powf(beta), a_j + 0.5 * eps)
    };
    let shape = Shape::RevenueBump {
        base: 0.5,
        amplitude,
        start,
        width: eps,
        g: BumpG { beta, c1 },
    };
    let points = HOLDER_GRID.max(64 * cells + 1);
    let lipschitz = audited_lipschitz(&shape, beta, p_min, points);
    Ok(DemandModel::new(
        format!("lb_family:{j}"),
        shape,
        beta,
        lipschitz,
        p_min,
        d_max,
    )?
    .with_maximizers(vec![peak]))
}

/// The pair `g1 = (1/2 + psi_a) / p`, `g2 = g1 + psi_b / p`.
///
/// `psi(q) = c exp(-1 / ((q - p_min)(1 - q)))` is supported on
/// `(p_min, 1)`, so `psi_a` lives on `(p_min + p_min/a, p_min + 1/a)` and
/// `psi_b` on `(p_min + (m0 + p_min)/b, p_min + (m0 + 1)/b)`, inside the
/// width-`1/b` cell `m0`. Both supports must stay inside `[p_min, 1]`.
/// The constant `c` is the largest `2^-k < 1/2` with `psi_a` in the class
/// `(alpha, 1)` and `psi_b` in `(beta, 1)`.
pub fn make_nonadaptive_pair(
    alpha: f64,
    beta: f64,
    p_min: f64,
    a: u32,
    b: u32,
    m0: u32,
) -> Result<(DemandModel, DemandModel)> {
    check_p_min(p_min)?;
    if !(alpha > beta && beta > 0.0) {
        return Err(domain(format!(
            "need alpha > beta > 0, got alpha={alpha}, beta={beta}"
        )));
    }
    if !(b > a && a >= 1) {
        return Err(domain(format!("need b > a >= 1, got a={a}, b={b}")));
    }
    if m0 >= b {
        return Err(domain(format!("cell index m0={m0} must be below b={b}")));
    }
    let (af, bf, mf) = (a as f64, b as f64, m0 as f64);
    if p_min + 1.0 / af > 1.0 {
        return Err(domain(format!("scale a={a} puts psi_a outside [p_min, 1]")));
    }
    if p_min + (mf + 1.0) / bf > 1.0 {
        return Err(domain(format!(
            "cell m0={m0} at scale b={b} leaves [p_min, 1]"
        )));
    }
    let shape_for = |c: f64, with_b: bool| Shape::PsiPair {
        psi: Psi { lo: p_min, c },
        alpha,
        beta,
        a: af,
        b: bf,
        m0: mf,
        with_b,
    };
    let a_cell = (p_min, p_min + 1.0 / af);
    let b_cell = (p_min + mf / bf, p_min + (mf + 1.0) / bf);
    let psi_only = |c: f64, which_b: bool| {
        move |x: Jet| {
            let psi = Psi { lo: p_min, c };
            let lo = Jet::cst(p_min);
            if which_b {
                psi.eval(Jet::cst(bf) * (x - lo) - Jet::cst(mf)) * Jet::cst(bf.powf(-beta))
            } else {
                psi.eval(Jet::cst(af) * (x - lo)) * Jet::cst(af.powf(-alpha))
            }
        }
    };
    let c = largest_power_of_two(2, |c| {
        holder_constant(psi_only(c, false), alpha, a_cell.0, a_cell.1, HOLDER_GRID) <= 1.0
            && holder_constant(psi_only(c, true), beta, b_cell.0, b_cell.1, HOLDER_GRID) <= 1.0
    })
    .ok_or_else(|| Error::Construction("no admissible psi constant".into()))?;

    let d_max = 1.0 / p_min;
    let points = HOLDER_GRID.max(64 * b as usize + 1);
    let peak_a = p_min + 0.5 * (1.0 + p_min) / af;
    let peak_b = p_min + (mf + 0.5 * (1.0 + p_min)) / bf;
    let s1 = shape_for(c, false);
    let l1 = audited_lipschitz(&s1, alpha, p_min, points);
    let g1 = DemandModel::new("nonadaptive_pair:1", s1, alpha, l1, p_min, d_max)?
        .with_maximizers(vec![peak_a]);
    let s2 = shape_for(c, true);
    let l2 = audited_lipschitz(&s2, beta, p_min, points);
    let g2 = DemandModel::new("nonadaptive_pair:2", s2, beta, l2, p_min, d_max)?
        .with_maximizers(vec![peak_a, peak_b]);
    Ok((g1, g2))
}

/// `f(p) = L (p - p_min)^beta`, the extremal case of the Taylor bound.
/// The recorded constant is the larger of `L` and the grid audit.
pub fn make_scaled_power(lipschitz: f64, beta: f64, p_min: f64, d_max: f64) -> Result<DemandModel> {
    check_p_min(p_min)?;
    if !(beta > 0.0 && lipschitz > 0.0) {
        return Err(domain(format!(
            "need beta > 0 and L > 0, got {beta}, {lipschitz}"
        )));
    }
    let shape = Shape::Power {
        offset: 0.0,
        slope: 0.0,
        c0: lipschitz,
        beta,
        origin: p_min,
    };
    let audit = holder_constant(shape_jet(&shape), beta, p_min, 1.0, HOLDER_GRID);
    DemandModel::new(
        "scaled_power",
        shape,
        beta,
        lipschitz.max(audit),
        p_min,
        d_max,
    )
}

/// `f(p) = sum_k coeffs[k] p^k` with `beta = degree + 1`, so the Taylor
/// polynomial of the model's own degree reproduces it.
pub fn make_polynomial(coeffs: &[f64], p_min: f64, d_max: f64) -> Result<DemandModel> {
    check_p_min(p_min)?;
    if coeffs.is_empty() || coeffs.len() > 5 {
        return Err(domain("polynomial models need 1 to 5 coefficients"));
    }
    let beta = coeffs.len() as f64;
    let shape = Shape::Polynomial {
        coeffs: coeffs.to_vec(),
    };
    let lipschitz =
        audited_lipschitz(&shape, beta, p_min, HOLDER_GRID).max(f64::MIN_POSITIVE.sqrt());
    DemandModel::new("polynomial", shape, beta, lipschitz, p_min, d_max)
}
