//! Condition and recipe inspection: evaluate σ0/σ1/γ, feasibility, the rate
//! constant, and the two closed-form parameter families for given
//! hyperparameters, or print the heavy-ball-rate recipe for (L, μ, δ, M).
//! Infeasible inputs produce a `feasible=false` report, not an error.

use chb_core::engine::HyperParams;
use chb_core::theory::{
    check_simplified, condition_report, rate_constant, recipe_families, rate_matching_recipe,
};
use std::collections::BTreeMap;

pub fn parse_kv(args: &[String]) -> Result<BTreeMap<String, f64>, String> {
    let mut map = BTreeMap::new();
    for a in args {
        let (k, v) = a.split_once('=').ok_or(format!("expected key=value, got `{a}`"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad value in `{a}`"))?;
        map.insert(k.trim().to_ascii_lowercase(), v);
    }
    Ok(map)
}

pub fn inspect_recipe(args: &[String]) -> Result<String, String> {
    let kv = parse_kv(args)?;
    let need = |k: &str| kv.get(k).copied().ok_or(format!("--recipe needs `{k}=`"));
    let l = need("l")?;
    let mu = need("mu")?;
    let delta = need("delta")?;
    let m = need("m")? as usize;
    let p = rate_matching_recipe(l, mu, delta, m).map_err(|e| e.to_string())?;
    let c = rate_constant(&p, mu, m).map_err(|e| e.to_string())?;
    let mut out = String::new();
    out.push_str(&format!(
        "recipe (L={l}, mu={mu}, delta={delta}, M={m}):\n  alpha = {:e}\n  beta  = {:e}\n  eps1  = {:e}\n  eta1  = {:e}\n  rho3  = 1\n",
        p.alpha, p.beta, p.eps1, p.eta1
    ));
    out.push_str(&format!("  c = {c:e}  (closed form (1-delta)/(L/mu) = {:e})\n", (1.0 - delta) * mu / l));
    let rep = condition_report(&p, m).map_err(|e| e.to_string())?;
    out.push_str(&format!(
        "  sigma0 = {:e}, sigma1(M) = {:e}, gamma = {:e}, feasible = {}\n",
        rep.sigma0, rep.sigma1_worst, rep.gamma, rep.feasible
    ));
    Ok(out)
}

pub fn inspect_params(args: &[String]) -> Result<String, String> {
    let kv = parse_kv(args)?;
    let get = |k: &str, dflt: f64| kv.get(k).copied().unwrap_or(dflt);
    let alpha = kv.get("alpha").copied().ok_or("--params needs `alpha=`")?;
    let m = get("m", 1.0) as usize;
    let p = HyperParams {
        alpha,
        beta: get("beta", 0.0),
        eps1: get("eps1", 0.0),
        eta1: get("eta1", f64::NAN),
        rho1: get("rho1", 1.0),
        rho2: get("rho2", 1.0),
        rho3: get("rho3", 1.0),
        lambda: get("lambda", 0.0),
        mu: get("mu", 0.0),
        l: get("l", 0.0),
    };
    // Unspecified eta1 defaults to the bracket-vanishing choice.
    let p = if p.eta1.is_nan() {
        HyperParams { eta1: ((1.0 - p.alpha * p.l) / (2.0 * p.alpha)).max(0.0), ..p }
    } else {
        p
    };
    let mut out = String::new();
    out.push_str(&format!(
        "params: alpha={:e} beta={:e} eps1={:e} eta1={:e} L={:e} mu={:e} M={m} rho=({},{},{})\n",
        p.alpha, p.beta, p.eps1, p.eta1, p.l, p.mu, p.rho1, p.rho2, p.rho3
    ));
    let rep = condition_report(&p, m).map_err(|e| e.to_string())?;
    out.push_str(&format!(
        "  sigma0 = {:e}\n  sigma1(M) = {:e}\n  gamma = {:e}\n  feasible = {}\n",
        rep.sigma0, rep.sigma1_worst, rep.gamma, rep.feasible
    ));
    if !rep.binding.is_empty() {
        out.push_str(&format!("  violated: {}\n", rep.binding.join(", ")));
    }
    let simplified = check_simplified(&p, m);
    out.push_str(&format!("  simplified condition: {simplified}\n"));
    if !simplified && p.l > 0.0 && p.alpha * p.l >= 1.0 - 1e-12 && (p.beta > 0.0 || p.eps1 > 0.0) {
        out.push_str("  note: alpha = 1/L leaves zero slack; any beta > 0 or eps1 > 0 exceeds the sufficient bound\n");
    }
    match rate_constant(&p, p.mu, m) {
        Ok(c) => out.push_str(&format!("  c(alpha, beta, eps1) = {c:e}\n")),
        Err(e) => out.push_str(&format!("  rate constant: {e}\n")),
    }
    if p.l > 0.0 {
        match recipe_families(&p, m) {
            Ok(fam) => {
                match fam.eta1_matched {
                    Some((beta_max, eps1_max)) => out.push_str(&format!(
                        "  family eta1=(1-aL)/(2a): beta <= {beta_max:e}; at beta={:e}, eps1 <= {eps1_max:e}\n",
                        p.beta
                    )),
                    None => out.push_str("  family eta1=(1-aL)/(2a): empty (alpha > 1/L)\n"),
                }
                let (eta1_max, beta_max, eps1_max) = fam.alpha_inv_l;
                out.push_str(&format!(
                    "  family alpha=1/L: eta1 <= {eta1_max:e}; beta <= {beta_max:e}; eps1 <= {eps1_max:e}\n"
                ));
            }
            Err(e) => out.push_str(&format!("  families unavailable: {e}\n")),
        }
    }
    Ok(out)
}
