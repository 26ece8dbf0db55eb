//! The invariant suite behind `verify`.

use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;

use super::JobConfig;
use crate::affine::{
    enumerate_pc, enumerate_pc_hat, in_alcove, stabilizer_poincare, stabilizer_poincare_brute,
    theta_classified, theta_count,
};
use crate::error::Result;
use crate::hecke::{
    braid_failures, hashed_test_function, quadratic_failures, sample_lattice_points, HeckeRep,
};
use crate::nodes::{alcove_margin, bethe_residual, min_pairwise_distance, solve_all};
use crate::pieri::{
    fusion_pieri, fusion_ring, iqm_defect, lomega_residual, lr_pieri, n_count,
    negative_fusion_weights, pieri_identity_check, pieri_weights, structure_constants_from,
    type_a_pieri_affine, u_coef, unit_coefficient, v_coef, v_coef_orbit_sum,
};
use crate::precise::invariance_defect;
use crate::rootdata::{RootDatum, RootType, Weight};
use crate::spherical::{basis_matrix_at, macdonald_identity_defect};

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
    pub runtime_ms: f64,
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Runs `f`, which returns `(residual, tolerance, detail)`; passes when `residual <= tolerance`.
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(f64, f64, String)>) {
        let start = Instant::now();
        let (passed, residual, tolerance, detail) = match f() {
            Ok((r, tol, detail)) => (r <= tol, r, tol, detail),
            Err(e) => (false, f64::NAN, f64::NAN, format!("error: {e}")),
        };
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            residual,
            tolerance,
            detail,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
}

fn pieri_orbits(d: &RootDatum) -> Result<Vec<(Weight, Vec<Weight>)>> {
    pieri_weights(d)
        .into_iter()
        .map(|w| Ok((w.clone(), d.weyl_orbit(&w)?)))
        .collect()
}

pub fn run_checks(d: &RootDatum, cfg: &JobConfig) -> Result<Vec<Check>> {
    let c = cfg.level;
    let t = cfg.t();
    let tol = cfg.tol;
    let seed = cfg.seed;
    let mut s = Suite { checks: Vec::new() };
    let pc = enumerate_pc(d, c)?;
    let orbits = pieri_orbits(d)?;

    let points = sample_lattice_points(d.rank, 100, c + 3, seed);
    s.run("hecke_quadratic", || {
        let rep = HeckeRep::new(d, c, cfg.t_exact.clone())?;
        let bad = quadratic_failures(&rep, &hashed_test_function(seed), &points);
        Ok((
            bad as f64,
            0.0,
            format!("{} points, exact arithmetic", points.len()),
        ))
    });
    s.run("hecke_braid", || {
        let rep = HeckeRep::new(d, c, cfg.t_exact.clone())?;
        let bad = braid_failures(&rep, &hashed_test_function(seed + 1), &points);
        Ok((
            bad as f64,
            0.0,
            format!("{} points, exact arithmetic", points.len()),
        ))
    });

    let nodes = solve_all(d, c, &t);
    let nodes = match nodes {
        Ok(n) => n,
        Err(e) => {
            s.run("nodes_solve", || Err(e));
            return Ok(s.checks);
        }
    };
    s.run("nodes_gradient", || {
        Ok((
            nodes.iter().fold(0.0, |m: f64, n| m.max(n.grad_residual)),
            1e-12,
            format!("{} nodes", nodes.len()),
        ))
    });
    s.run("nodes_bethe", || {
        Ok((
            nodes
                .iter()
                .fold(0.0, |m: f64, n| m.max(bethe_residual(d, &n.xi, c, &t))),
            1e-10,
            String::new(),
        ))
    });
    s.run("nodes_distinct", || {
        let dist = min_pairwise_distance(&nodes);
        Ok((
            if dist > 1e-6 { 0.0 } else { 1.0 },
            0.0,
            format!("min distance {dist:e}"),
        ))
    });
    s.run("nodes_in_alcove", || {
        let margin = nodes
            .iter()
            .map(|n| alcove_margin(d, &n.xi))
            .fold(f64::INFINITY, f64::min);
        Ok((
            if margin > 0.0 { 0.0 } else { 1.0 },
            0.0,
            format!("min margin {margin:e}"),
        ))
    });
    s.run("dimension", || {
        let hat = enumerate_pc_hat(d, c)?.len();
        Ok((
            (pc.len() as f64 - hat as f64).abs(),
            0.0,
            format!("|P_c| = {}, |hat P_c| = {hat}", pc.len()),
        ))
    });

    let basis = match basis_matrix_at(d, c, &t, nodes.clone()) {
        Ok(b) => b,
        Err(e) => {
            s.run("basis_matrix", || Err(e));
            return Ok(s.checks);
        }
    };
    s.run("phi_equals_msf", || {
        let rep = HeckeRep::new(d, c, t.map(|&x| Complex64::new(x, 0.0)))?;
        let mut worst = 0.0f64;
        for (k, node) in nodes.iter().enumerate() {
            let phi = rep.Phi(&node.xi)?;
            for (i, lam) in pc.iter().enumerate() {
                worst = worst.max((phi.eval(lam) - basis.entries[(i, k)]).norm());
            }
        }
        Ok((
            worst,
            tol.unwrap_or(1e-8),
            format!("condition number {:.3e}", basis.condition),
        ))
    });
    s.run("phi_invariance", || {
        let defects: Vec<f64> = nodes
            .par_iter()
            .enumerate()
            .map(|(k, node)| invariance_defect(d, c, &t, node, 20, seed.wrapping_add(k as u64)))
            .collect::<Result<_>>()?;
        Ok((
            defects.iter().fold(0.0, |m: f64, &x| m.max(x)),
            tol.unwrap_or(1e-8),
            "20 random points per node, 192-bit fixed point".into(),
        ))
    });
    s.run("pieri_identity", || {
        let mut worst = 0.0f64;
        for lam in &pc {
            for (omega, _) in &orbits {
                worst = worst.max(pieri_identity_check(d, &basis, lam, omega)?);
            }
        }
        Ok((worst, tol.unwrap_or(1e-8), String::new()))
    });
    s.run("u_minuscule_zero", || {
        let mut bad = 0;
        for lam in &pc {
            for omega in d.minuscule_weights() {
                bad += usize::from(!u_coef(d, lam, &omega, c)?.is_zero());
            }
        }
        Ok((bad as f64, 0.0, "exact".into()))
    });
    s.run("u_limit", || {
        let theta = d.quasi_minuscule_weight();
        let mut bad = 0;
        for lam in &pc {
            let limit = u_coef(d, lam, &theta, c)?.limit_at_zero()?;
            bad += usize::from(
                limit != BigRational::from_integer((-n_count(d, lam, &theta, c)?).into()),
            );
        }
        Ok((bad as f64, 0.0, "lim U = -N, exact".into()))
    });
    s.run("v_orbit_sum", || {
        let mut bad = 0;
        for lam in &pc {
            for (omega, orbit) in &orbits {
                for nu in orbit {
                    if in_alcove(d, &(lam + nu), c) {
                        bad += usize::from(
                            v_coef(d, lam, nu, c)? != v_coef_orbit_sum(d, lam, nu, omega, c)?,
                        );
                    }
                }
            }
        }
        Ok((
            bad as f64,
            0.0,
            "product formula vs orbit scan, exact".into(),
        ))
    });
    let table = structure_constants_from(&basis);
    s.run("structure_solve", || {
        let tab = table.as_ref().map_err(Clone::clone)?;
        Ok((tab.residual, tol.unwrap_or(1e-8), String::new()))
    });
    s.run("two_routes", || {
        let tab = table.as_ref().map_err(Clone::clone)?;
        let mut worst = 0.0f64;
        for lam in &pc {
            for (omega, _) in &orbits {
                let exact = lr_pieri(d, lam, omega, c)?;
                for nu in &pc {
                    let want = match exact.get(nu) {
                        Some(p) => p.eval_f64(&t)?,
                        None => 0.0,
                    };
                    let got = tab.get(lam, omega, nu).expect("weights of P_c");
                    worst = worst.max((got - want).norm());
                }
            }
        }
        Ok((worst, tol.unwrap_or(1e-8), "lr_pieri vs basis solve".into()))
    });
    s.run("associativity", || {
        let tab = table.as_ref().map_err(Clone::clone)?;
        Ok((
            tab.associativity_defect(),
            tol.unwrap_or(1e-7),
            String::new(),
        ))
    });
    s.run("commutativity", || {
        let tab = table.as_ref().map_err(Clone::clone)?;
        Ok((
            tab.commutativity_defect(),
            tol.unwrap_or(1e-7),
            String::new(),
        ))
    });
    s.run("unit_law", || {
        let tab = table.as_ref().map_err(Clone::clone)?;
        let unit = unit_coefficient(d).eval_f64(&t)?;
        Ok((
            tab.unit_defect(unit),
            tol.unwrap_or(1e-8),
            format!("M_0 = W_0(t) = {unit}"),
        ))
    });

    let fusion = fusion_ring(d, c);
    s.run("fusion_integral", || {
        let f = fusion.as_ref().map_err(Clone::clone)?;
        Ok((
            f.residual,
            1e-6,
            "all coefficients within 1e-6 of integers".into(),
        ))
    });
    s.run("fusion_pieri", || {
        let f = fusion.as_ref().map_err(Clone::clone)?;
        let mut bad = 0;
        for lam in &pc {
            for (omega, _) in &orbits {
                let rule = fusion_pieri(d, lam, omega, c)?;
                for nu in &pc {
                    bad += usize::from(
                        f.integer(lam, omega, nu) != Some(rule.get(nu).copied().unwrap_or(0)),
                    );
                }
            }
        }
        Ok((bad as f64, 0.0, "table vs boxed Pieri rule".into()))
    });
    s.run("fusion_sign", || {
        let f = fusion.as_ref().map_err(Clone::clone)?;
        let ints = f.integers.as_ref().expect("integral");
        let negatives = ints.iter().filter(|&&v| v < 0).count();
        if f.negative_expected {
            let theta = d.quasi_minuscule_weight();
            let predicted = negative_fusion_weights(d, c)?;
            let bad = predicted
                .iter()
                .filter(|l| f.integer(l, &theta, l) != Some(-1))
                .count();
            Ok((
                (bad + usize::from(predicted.is_empty())) as f64,
                0.0,
                format!("{negatives} negative entries, expected at this twisted level"),
            ))
        } else {
            Ok((negatives as f64, 0.0, "nonnegative".into()))
        }
    });
    if d.label == RootType::A(1) {
        s.run("fusion_su2", || {
            let f = fusion.as_ref().map_err(Clone::clone)?;
            let mut bad = 0;
            for a in 0..=c {
                for b in 0..=c {
                    for e in 0..=c {
                        let expect = i64::from(
                            e >= (a - b).abs()
                                && e <= (a + b).min(2 * c - a - b)
                                && (a + b - e) % 2 == 0,
                        );
                        bad += usize::from(
                            f.integer(&Weight(vec![a]), &Weight(vec![b]), &Weight(vec![e]))
                                != Some(expect),
                        );
                    }
                }
            }
            Ok((bad as f64, 0.0, "truncated Clebsch-Gordan".into()))
        });
    }
    if let RootType::A(m) = d.label {
        s.run("type_a_pieri", || {
            let mut bad = 0;
            for lam in &pc {
                for r in 1..=m {
                    bad += usize::from(
                        lr_pieri(d, lam, &Weight::fundamental(m, r), c)?
                            != type_a_pieri_affine(lam, r, c),
                    );
                }
            }
            Ok((bad as f64, 0.0, "exact".into()))
        });
    }

    s.run("integral_reflection_exact", || {
        let rep = HeckeRep::new(d, c, cfg.t_exact.clone())?;
        let g = hashed_test_function(seed + 2);
        let mut bad = 0;
        for lam in &pc {
            for (_, orbit) in &orbits {
                for nu in orbit {
                    bad += usize::from(!num_traits::Zero::is_zero(&iqm_defect(&rep, &g, lam, nu)?));
                }
            }
        }
        Ok((bad as f64, 0.0, "arbitrary f, exact".into()))
    });
    s.run("integral_reflection_phi", || {
        let rep = HeckeRep::new(d, c, t.map(|&x| Complex64::new(x, 0.0)))?;
        let mut worst = 0.0f64;
        for node in &nodes {
            let phi = rep.Phi(&node.xi)?;
            for lam in &pc {
                for (omega, _) in &orbits {
                    worst = worst.max(lomega_residual(&rep, &phi, &node.xi, lam, omega)?);
                }
            }
        }
        Ok((
            worst,
            tol.unwrap_or(1e-9),
            "m_omega Phi(lambda) against the closed form of L_omega".into(),
        ))
    });
    s.run("theta_classification", || {
        let mut bad = 0;
        for lam in &pc {
            for (_, orbit) in &orbits {
                for nu in orbit {
                    bad += usize::from(
                        theta_count(d, &(lam + nu), c) != theta_classified(d, lam, nu, c)?,
                    );
                }
            }
        }
        Ok((bad as f64, 0.0, String::new()))
    });
    s.run("macdonald_identity", || {
        Ok((
            macdonald_identity_defect(d, &t, 20, seed)?,
            tol.unwrap_or(1e-10),
            "20 random points".into(),
        ))
    });
    s.run("schur_identity", || {
        let q = |x: &BigRational| -> Result<num_rational::Rational64> {
            use num_traits::ToPrimitive;
            let n = x.numer().to_i64().zip(x.denom().to_i64());
            n.map(|(a, b)| num_rational::Rational64::new(a, b))
                .ok_or_else(|| {
                    crate::error::Error::Config("parameter too large for the Schur check".into())
                })
        };
        let ok = d.schur_identity_holds(q(&cfg.t_exact.short)?, q(&cfg.t_exact.long)?);
        Ok((if ok { 0.0 } else { 1.0 }, 0.0, "exact".into()))
    });
    s.run("poincare_product", || {
        let mut bad = 0;
        for lam in &pc {
            bad += usize::from(
                stabilizer_poincare(d, lam, c)? != stabilizer_poincare_brute(d, lam, c)?,
            );
        }
        Ok((bad as f64, 0.0, "exact".into()))
    });
    Ok(s.checks)
}
