//! Plot-ready datasets: Raman tilt, FWM efficiency map, integrand trace and
//! island listing.

use anyhow::{bail, Result};
use isrs_egn::fwm::{fwm_efficiency, integrand_trace};
use isrs_egn::units::linear_to_db;
use isrs_egn::{enumerate_islands, Chain, Config, Query};

use crate::output::{num, Manifest, Table};

pub fn raman(cfg: &Config, manifest: &Manifest, points: usize) -> Result<Table> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    let chain = Chain::from_config(cfg)?;
    let ctx = chain.contexts()[0];
    let span = chain.spans()[0];
    let mut t = Table::new(manifest, &["z_km", "coi", "f_hz", "srs_gain_db", "rho_db"]);
    t.comment("first span; f is the offset from the band center");
    for p in 0..points {
        let z = span.length * p as f64 / (points - 1) as f64;
        for k in cfg.grid.indices() {
            let f = cfg.grid.center_frequency(k, cfg.numerics.center_convention);
            t.push(vec![
                num(z),
                k.to_string(),
                num(f),
                num(linear_to_db(ctx.srs_gain(z, f))),
                num(linear_to_db(ctx.rho(z, f))),
            ]);
        }
    }
    Ok(t)
}

pub fn fwm_map(cfg: &Config, manifest: &Manifest, coi: i32) -> Result<Table> {
    if !cfg.grid.contains(coi) {
        bail!("COI {coi} outside the grid");
    }
    let chain = Chain::from_config(cfg)?;
    let span = chain.spans()[0];
    let ctx = chain.contexts()[0];
    let conv = cfg.numerics.center_convention;
    let f = cfg.grid.center_frequency(coi, conv);
    let half = cfg.grid.m() as f64 * cfg.grid.spacing() + cfg.grid.symbol_rate() / 2.0;
    let step = cfg.numerics.resolution;
    let n = (2.0 * half / step).floor() as usize;
    let mut t = Table::new(manifest, &["f1_hz", "f2_hz", "f_hz", "chi_rad_per_km", "efficiency"]);
    t.comment(format!("first span; |mu| / L_eff with method {}", cfg.numerics.mu_method));
    for a in 0..n {
        let f1 = -half + (a as f64 + 0.5) * step;
        for b in 0..n {
            let f2 = -half + (b as f64 + 0.5) * step;
            let q = Query { f1, f2, f, span, ctx };
            let eff = fwm_efficiency(&q, cfg.numerics.mu_method, cfg.numerics.delta_z, cfg.numerics.samples_per_cycle)?;
            t.push(vec![num(f1), num(f2), num(f), num(q.chi()), num(eff)]);
        }
    }
    Ok(t)
}

pub fn trace(cfg: &Config, manifest: &Manifest, freqs: (f64, f64, f64), points: usize) -> Result<Table> {
    let chain = Chain::from_config(cfg)?;
    let q = Query {
        f1: freqs.0,
        f2: freqs.1,
        f: freqs.2,
        span: chain.spans()[0],
        ctx: chain.contexts()[0],
    };
    let tr = integrand_trace(&q, points)?;
    let mut t = Table::new(
        manifest,
        &["z_km", "total_re", "total_im", "srs_gain", "attenuation", "pmf_re", "pmf_im"],
    );
    t.comment(format!("chi_rad_per_km={}", num(q.chi())));
    for i in 0..tr.len() {
        t.push(vec![
            num(tr.z[i]),
            num(tr.total[i].re),
            num(tr.total[i].im),
            num(tr.srs_gain_term[i]),
            num(tr.attenuation_term[i]),
            num(tr.pmf_term[i].re),
            num(tr.pmf_term[i].im),
        ]);
    }
    Ok(t)
}

pub fn islands(manifest: &Manifest, m: i32, coi: i32) -> Result<Table> {
    if m < 0 || coi.abs() > m {
        bail!("COI {coi} outside a grid of half-width {m}");
    }
    let mut t = Table::new(manifest, &["kappa1", "kappa2", "l", "kappa4", "class"]);
    t.comment(format!("m={m} coi={coi}"));
    for isl in enumerate_islands(m, coi) {
        t.push(vec![
            isl.kappa1.to_string(),
            isl.kappa2.to_string(),
            isl.l.to_string(),
            isl.kappa4(coi).to_string(),
            isl.class.as_str().to_string(),
        ]);
    }
    Ok(t)
}
