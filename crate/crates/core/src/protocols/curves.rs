use super::{
    find_sign_change, mark_claim, mark_near, sub_seed, validate_grid, CrossoverConfig, CrossoverResult, CurvePoint,
    CurveTable, ProtocolError, Result,
};
use crate::entanglement::{cep1_density, cep2_density, Probability};
use crate::lattice::{build, marked_nodes, transform, Boundary, Coord, Graph, LatticeKind, TransformRule};
use crate::percolation::{mean_stderr, pi, sample_records, theta, Estimate, TranslatedTuples};
use crate::report::{Provenance, Row};
use crate::series::{published_series, Polynomial};

/// Bracket searched for the triangular vs CEP II crossing.
pub const DHEX_BRACKET: (f64, f64) = (0.36, 0.40);
/// Bracket searched for the bowtie crossing.
pub const BOWTIE_BRACKET: (f64, f64) = (0.40, 0.45);

fn pc(kind: LatticeKind) -> f64 {
    kind.critical_density().expect("kind has a known threshold")
}

fn density(p: f64) -> Result<Probability> {
    Probability::new(p).map_err(|e| ProtocolError::InvalidArgument(e.to_string()))
}

fn periodic(kind: LatticeKind, l: usize, p: f64) -> Result<Graph> {
    Ok(build(kind, l, Boundary::Periodic, &vec![p; kind.class_count()])?)
}

fn transformed(kind: LatticeKind, l: usize, p: f64, rule: TransformRule) -> Result<Vec<Graph>> {
    Ok(transform(&periodic(kind, l, p)?, rule)?)
}

struct Ctx<'a> {
    lattice: &'a str,
    l: usize,
    nsamples: usize,
    seed: u64,
}

impl Ctx<'_> {
    fn mc(&self, quantity: &str, p: f64, e: &Estimate, pcs: &[f64]) -> Row {
        let mut r = Row::from_estimate(quantity, self.lattice, p, e);
        r.seed = self.seed;
        mark_near(&mut r, pcs);
        r
    }

    fn value(&self, quantity: &str, p: f64, v: CurvePoint, provenance: Provenance, pcs: &[f64]) -> Row {
        let mut r = Row::new(quantity, self.lattice, p, v.mean, provenance, self.seed);
        r.l = Some(self.l);
        r.nsamples = Some(self.nsamples);
        r.stderr = Some(v.stderr);
        mark_near(&mut r, pcs);
        r
    }

    /// A value computed from `inputs`, flagged near-critical if any input is.
    fn derived(&self, quantity: &str, p: f64, v: CurvePoint, inputs: &[&Row]) -> Row {
        let mut r = self.value(quantity, p, v, Provenance::Derived, &[]);
        if inputs.iter().any(|x| x.has_flag("near_pc")) {
            r.flag("near_pc");
        }
        r
    }

    fn series(&self, quantity: &str, p: f64, poly: &Polynomial, at_p: f64) -> Row {
        Row::new(quantity, self.lattice, p, poly.eval_at_p(at_p), Provenance::Series, self.seed)
    }
}

fn difference(a: &Estimate, b: &Estimate) -> CurvePoint {
    CurvePoint {
        mean: a.mean - b.mean,
        stderr: a.stderr.hypot(b.stderr),
    }
}

/// θ on the kagome lattice against θ on the square lattice obtained from it
/// by swapping.
pub fn kagome_vs_square(grid: &[f64], l: usize, nsamples: usize, seed: u64) -> Result<CurveTable> {
    validate_grid(grid)?;
    let mut t = CurveTable::new("kagome_vs_square", grid, l, nsamples, seed);
    let ctx = Ctx {
        lattice: "kagome",
        l,
        nsamples,
        seed,
    };
    let sq_ctx = Ctx { lattice: "square", ..ctx };
    let th_kag = published_series("theta_kagome")?;
    let th_sq = published_series("theta_square")?;
    for &p in grid {
        let kag = periodic(LatticeKind::Kagome, l, p)?;
        let sq = transform(&kag, TransformRule::KagomeToSquare)?.remove(0);
        let ek = theta(&kag, nsamples, sub_seed(seed, 0))?;
        let es = theta(&sq, nsamples, sub_seed(seed, 1))?;
        let rk = ctx.mc("theta_kagome", p, &ek, &[pc(LatticeKind::Kagome)]);
        let rs = sq_ctx.mc("theta_square", p, &es, &[pc(LatticeKind::Square)]);
        let d = difference(&es, &ek);
        let mut rd = ctx.derived("diff_square_minus_kagome", p, d, &[&rk, &rs]);
        mark_claim(&mut rd);
        let gap = 1.0 - es.mean;
        let normalized = (gap > 0.0).then(|| {
            let mut r = ctx.derived(
                "diff_normalized",
                p,
                CurvePoint {
                    mean: d.mean / gap,
                    stderr: d.stderr / gap,
                },
                &[&rk, &rs],
            );
            mark_claim(&mut r);
            r
        });
        t.rows.extend([rk, rs, rd]);
        t.rows.extend(normalized);
        t.rows.push(ctx.series("theta_kagome_series", p, &th_kag, p));
        t.rows.push(sq_ctx.series("theta_square_series", p, &th_sq, p));
    }
    Ok(t)
}

/// Density below which CEP II leaves the hexagonal lattice subcritical.
pub fn cep2_threshold() -> f64 {
    let target = pc(LatticeKind::Hexagonal);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if cep2_density(Probability::new(mid).expect("in range")).value() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dhex_estimates(p: f64, l: usize, nsamples: usize, seed: u64) -> Result<[Estimate; 3]> {
    let pr = density(p)?;
    let hex1 = periodic(LatticeKind::Hexagonal, l, cep1_density(pr).value())?;
    let hex2 = periodic(LatticeKind::Hexagonal, l, cep2_density(pr).value())?;
    let tri = transformed(LatticeKind::DoubleBondHexagonal, l, p, TransformRule::DHexToTriangular)?.remove(0);
    Ok([
        theta(&hex1, nsamples, sub_seed(seed, 0))?,
        theta(&hex2, nsamples, sub_seed(seed, 1))?,
        theta(&tri, nsamples, sub_seed(seed, 2))?,
    ])
}

/// `θ_QEP - θ_CEPII` at `p`: the triangular lattice obtained by swapping on
/// the double-bond hexagonal lattice, against the distilled hexagonal one.
pub fn dhex_qep_minus_cep2(p: f64, l: usize, nsamples: usize, seed: u64) -> Result<CurvePoint> {
    let pr = density(p)?;
    let hex2 = periodic(LatticeKind::Hexagonal, l, cep2_density(pr).value())?;
    let tri = transformed(LatticeKind::DoubleBondHexagonal, l, p, TransformRule::DHexToTriangular)?.remove(0);
    let a = theta(&tri, nsamples, sub_seed(seed, 2))?;
    let b = theta(&hex2, nsamples, sub_seed(seed, 1))?;
    Ok(difference(&a, &b))
}

pub fn dhex_crossover(l: usize, seed: u64, cfg: &CrossoverConfig) -> Result<CrossoverResult> {
    find_sign_change(|p, n| dhex_qep_minus_cep2(p, l, n, seed), DHEX_BRACKET, cfg)
}

/// CEP I, CEP II and the swapped triangular lattice on the double-bond
/// hexagonal lattice. `L` must be a multiple of 3.
pub fn dhex_three_way(
    grid: &[f64],
    l: usize,
    nsamples: usize,
    seed: u64,
    crossover: Option<&CrossoverConfig>,
) -> Result<CurveTable> {
    validate_grid(grid)?;
    let mut t = CurveTable::new("dhex_three_way", grid, l, nsamples, seed);
    let hex = Ctx {
        lattice: "hexagonal",
        l,
        nsamples,
        seed,
    };
    let tri = Ctx {
        lattice: "triangular",
        ..hex
    };
    let pc1 = pc(LatticeKind::DoubleBondHexagonal);
    let pc2 = cep2_threshold();
    let pc3 = pc(LatticeKind::Triangular);
    let s_cep1 = published_series("theta_cep1")?;
    let s_hex = published_series("theta_hexagonal")?;
    let s_tri = published_series("theta_triangular")?;
    for &p in grid {
        let [e1, e2, e3] = dhex_estimates(p, l, nsamples, seed)?;
        let r1 = hex.mc("theta_cep1", p, &e1, &[pc1]);
        let r2 = hex.mc("theta_cep2", p, &e2, &[pc2]);
        let r3 = tri.mc("theta_qep", p, &e3, &[pc3]);
        let mut d1 = tri.derived("diff_qep_minus_cep1", p, difference(&e3, &e1), &[&r1, &r3]);
        let mut d2 = tri.derived("diff_qep_minus_cep2", p, difference(&e3, &e2), &[&r2, &r3]);
        mark_claim(&mut d1);
        mark_claim(&mut d2);
        t.rows.extend([r1, r2, r3, d1, d2]);
        let p2 = cep2_density(density(p)?).value();
        t.rows.push(hex.series("theta_cep1_series", p, &s_cep1, p));
        t.rows.push(hex.series("theta_cep2_series", p, &s_hex, p2));
        t.rows.push(tri.series("theta_qep_series", p, &s_tri, p));
    }
    if let Some(cfg) = crossover {
        t.crossover = Some(dhex_crossover(l, seed, cfg)?);
    }
    Ok(t)
}

/// One density of the square-lattice doubling comparison. `margin` is
/// `(2 - θ²) - (2 - ω)²`, positive where doubling beats plain conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingPoint {
    pub theta: CurvePoint,
    pub pi: CurvePoint,
    pub omega: CurvePoint,
    pub margin: CurvePoint,
}

/// θ, π and ω for the pair `A, A′` and the advantage margin, all from the
/// same samples. The margin's error uses the joint per-sample influence
/// `-2θ(T - θ) + 2(2 - ω)(X - ωY)/Ȳ`, where `T` is the largest-cluster
/// fraction, `X` the fraction of translates with both nodes in it and `Y`
/// the fraction with `A′` in it. The leading fluctuations of `T` and `X - ωY`
/// cancel, which the independent-error sum would miss.
pub fn doubling_point(p: f64, l: usize, nsamples: usize, seed: u64) -> Result<DoublingPoint> {
    if nsamples < 2 {
        return Err(ProtocolError::InvalidArgument("need at least two samples".into()));
    }
    let g = periodic(LatticeKind::Square, l, p)?;
    let marked = marked_nodes(&g, TransformRule::SquareDoubling, 2)?;
    let tuples = TranslatedTuples::new(&g, &marked.near_coords)?;
    let norm = tuples.len() as f64;
    let rec: Vec<[f64; 4]> = sample_records(&g, nsamples, seed, |s| {
        let (mut any, mut both, mut cond) = (0usize, 0usize, 0usize);
        for t in tuples.tuples() {
            let (a, b) = (s.in_largest(t[0]), s.in_largest(t[1]));
            any += (a || b) as usize;
            both += (a && b) as usize;
            cond += b as usize;
        }
        [
            s.largest_fraction(),
            any as f64 / norm,
            both as f64 / norm,
            cond as f64 / norm,
        ]
    });
    let col = |k: usize| rec.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (th, th_se) = mean_stderr(&col(0));
    let (pi_m, pi_se) = mean_stderr(&col(1));
    let (xs, ys) = (col(2), col(3));
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    if ybar <= 0.0 {
        return Err(crate::percolation::PercolationError::NoConditioningEvents.into());
    }
    let om = xs.iter().sum::<f64>() / ys.iter().sum::<f64>();
    let om_infl: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - om * y) / ybar).collect();
    let (_, om_se) = mean_stderr(&om_infl);
    let z: Vec<f64> = rec
        .iter()
        .zip(&om_infl)
        .map(|(r, w)| -2.0 * th * (r[0] - th) + 2.0 * (2.0 - om) * w)
        .collect();
    let (_, margin_se) = mean_stderr(&z);
    Ok(DoublingPoint {
        theta: CurvePoint {
            mean: th,
            stderr: th_se,
        },
        pi: CurvePoint {
            mean: pi_m,
            stderr: pi_se,
        },
        omega: CurvePoint {
            mean: om,
            stderr: om_se,
        },
        margin: CurvePoint {
            mean: (2.0 - th * th) - (2.0 - om) * (2.0 - om),
            stderr: margin_se,
        },
    })
}

/// Square lattice split into two square lattices, against plain conversion
/// for the pair `A = (0,0)`, `A′ = (1,1)`.
pub fn square_doubling(grid: &[f64], l: usize, nsamples: usize, seed: u64) -> Result<CurveTable> {
    validate_grid(grid)?;
    let mut t = CurveTable::new("square_doubling", grid, l, nsamples, seed);
    let ctx = Ctx {
        lattice: "square",
        l,
        nsamples,
        seed,
    };
    let pcs = [pc(LatticeKind::Square)];
    let one = Polynomial::constant(1, 64);
    let th_s = published_series("theta_square")?;
    let gap = &one - &(&th_s * &th_s);
    let p_double_s = &one - &(&gap * &gap);
    let pi_s = published_series("pi_square")?;
    let pi_sq_s = &pi_s * &pi_s;
    for &p in grid {
        let d = doubling_point(p, l, nsamples, seed)?;
        let (th, pi_m, om) = (d.theta.mean, d.pi.mean, d.omega.mean);
        let rt = ctx.value("theta", p, d.theta, Provenance::MonteCarlo, &pcs);
        let rp = ctx.value("pi", p, d.pi, Provenance::MonteCarlo, &pcs);
        let ro = ctx.value("omega", p, d.omega, Provenance::MonteCarlo, &pcs);
        let g = 1.0 - th * th;
        let pd = CurvePoint {
            mean: 1.0 - g * g,
            stderr: 4.0 * th * g * d.theta.stderr,
        };
        let ps = CurvePoint {
            mean: pi_m * pi_m,
            stderr: 2.0 * pi_m * d.pi.stderr,
        };
        let lhs = CurvePoint {
            mean: (2.0 - om) * (2.0 - om),
            stderr: 2.0 * (2.0 - om) * d.omega.stderr,
        };
        let rhs = CurvePoint {
            mean: 2.0 - th * th,
            stderr: 2.0 * th * d.theta.stderr,
        };
        let rows = [
            ctx.derived("p_double", p, pd, &[&rt]),
            ctx.derived("pi_squared", p, ps, &[&rp]),
            ctx.derived("condition_lhs", p, lhs, &[&ro]),
            ctx.derived("condition_rhs", p, rhs, &[&rt]),
        ];
        let mut margin = ctx.derived("condition_margin", p, d.margin, &[&rt, &ro]);
        mark_claim(&mut margin);
        t.rows.extend([rt, rp, ro]);
        t.rows.extend(rows);
        t.rows.push(margin);
        t.rows.push(ctx.series("p_double_series", p, &p_double_s, p));
        t.rows.push(ctx.series("pi_squared_series", p, &pi_sq_s, p));
    }
    Ok(t)
}

/// Bowtie triple under plain conversion against the split into a triangular
/// and a square lattice.
struct BowtiePoint {
    pi_bowtie: Estimate,
    theta_tri: Estimate,
    pi_square: Estimate,
    p_doub: CurvePoint,
    pi_bowtie_sq: CurvePoint,
    margin: CurvePoint,
}

fn bowtie_point(p: f64, l: usize, nsamples: usize, seed: u64) -> Result<BowtiePoint> {
    let bt = periodic(LatticeKind::Bowtie, l, p)?;
    let marked = marked_nodes(&bt, TransformRule::BowtieSplit, 2)?;
    let mut parts = transform(&bt, TransformRule::BowtieSplit)?;
    let sq = parts.pop().expect("square part");
    let tri = parts.pop().expect("triangular part");
    let pair: Vec<Coord> = marked.near_coords[1..].to_vec();
    let e_bt = pi(&bt, &marked.near_coords, nsamples, sub_seed(seed, 0))?;
    let e_tri = theta(&tri, nsamples, sub_seed(seed, 1))?;
    let e_sq = pi(&sq, &pair, nsamples, sub_seed(seed, 2))?;
    let (t, b) = (e_tri.mean, e_sq.mean);
    let (t2, b2) = (t * t, b * b);
    let p_doub = CurvePoint {
        mean: t2 + b2 - t2 * b2,
        stderr: (2.0 * t * (1.0 - b2) * e_tri.stderr).hypot(2.0 * b * (1.0 - t2) * e_sq.stderr),
    };
    let pi_bowtie_sq = CurvePoint {
        mean: e_bt.mean * e_bt.mean,
        stderr: 2.0 * e_bt.mean * e_bt.stderr,
    };
    let margin = CurvePoint {
        mean: p_doub.mean - pi_bowtie_sq.mean,
        stderr: p_doub.stderr.hypot(pi_bowtie_sq.stderr),
    };
    Ok(BowtiePoint {
        pi_bowtie: e_bt,
        theta_tri: e_tri,
        pi_square: e_sq,
        p_doub,
        pi_bowtie_sq,
        margin,
    })
}

/// `P_doub - π_bt²` at `p`; positive where the split is better.
pub fn bowtie_margin(p: f64, l: usize, nsamples: usize, seed: u64) -> Result<CurvePoint> {
    Ok(bowtie_point(p, l, nsamples, seed)?.margin)
}

pub fn bowtie_crossover(l: usize, seed: u64, cfg: &CrossoverConfig) -> Result<CrossoverResult> {
    find_sign_change(|p, n| bowtie_margin(p, l, n, seed), BOWTIE_BRACKET, cfg)
}

/// `L` must be even and at least 8.
pub fn bowtie_split(
    grid: &[f64],
    l: usize,
    nsamples: usize,
    seed: u64,
    crossover: Option<&CrossoverConfig>,
) -> Result<CurveTable> {
    validate_grid(grid)?;
    let mut t = CurveTable::new("bowtie_split", grid, l, nsamples, seed);
    let bt = Ctx {
        lattice: "bowtie",
        l,
        nsamples,
        seed,
    };
    let tri = Ctx {
        lattice: "triangular",
        ..bt
    };
    let sq = Ctx { lattice: "square", ..bt };
    let one = Polynomial::constant(1, 64);
    let s_bt = published_series("pi_bowtie")?;
    let s_bt2 = &s_bt * &s_bt;
    let s_tri = published_series("theta_triangular")?;
    let s_sq = published_series("pi_square_b")?;
    let s_doub = &one - &(&(&one - &(&s_tri * &s_tri)) * &(&one - &(&s_sq * &s_sq)));
    for &p in grid {
        let b = bowtie_point(p, l, nsamples, seed)?;
        let r_bt = bt.mc("pi_bowtie", p, &b.pi_bowtie, &[pc(LatticeKind::Bowtie)]);
        let r_tri = tri.mc("theta_triangular", p, &b.theta_tri, &[pc(LatticeKind::Triangular)]);
        let r_sq = sq.mc("pi_square_pair", p, &b.pi_square, &[pc(LatticeKind::Square)]);
        let r_doub = bt.derived("p_doub", p, b.p_doub, &[&r_tri, &r_sq]);
        let r_bt2 = bt.derived("pi_bowtie_squared", p, b.pi_bowtie_sq, &[&r_bt]);
        let mut r_m = bt.derived("margin", p, b.margin, &[&r_tri, &r_sq, &r_bt]);
        mark_claim(&mut r_m);
        t.rows.extend([r_bt, r_tri, r_sq, r_doub, r_bt2, r_m]);
        t.rows.push(bt.series("pi_bowtie_squared_series", p, &s_bt2, p));
        t.rows.push(bt.series("p_doub_series", p, &s_doub, p));
    }
    if let Some(cfg) = crossover {
        t.crossover = Some(bowtie_crossover(l, seed, cfg)?);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_density() {
        let t = kagome_vs_square(&[0.8, 1.0], 8, 2, 1).unwrap();
        for q in ["theta_kagome", "theta_square", "theta_kagome_series", "theta_square_series"] {
            assert_eq!(t.get(q, 1.0).unwrap().mean, 1.0, "{q}");
        }
        assert!(t.get("diff_normalized", 1.0).is_none());
        assert!(t.get("diff_square_minus_kagome", 1.0).unwrap().has_flag("indistinguishable"));

        let t = square_doubling(&[1.0], 8, 2, 1).unwrap();
        for q in ["p_double", "pi_squared", "condition_lhs", "condition_rhs"] {
            assert_eq!(t.get(q, 1.0).unwrap().mean, 1.0, "{q}");
        }
    }

    #[test]
    fn cep2_saturates() {
        let t = dhex_three_way(&[2.0 - 2f64.sqrt(), 0.8], 6, 2, 3, None).unwrap();
        for r in t.column("theta_cep2") {
            assert_eq!(r.mean, 1.0);
        }
        let pc2 = cep2_threshold();
        assert!((pc2 - 0.35848).abs() < 1e-4);
        assert!(pc(LatticeKind::Triangular) < pc2 && pc2 < pc(LatticeKind::DoubleBondHexagonal));
    }

    #[test]
    fn series_columns() {
        let t = square_doubling(&[0.9], 8, 2, 1).unwrap();
        let q: f64 = 0.1;
        let want = 1.0 - 4.0 * q.powi(8) - 32.0 * q.powi(10);
        assert!((t.get("p_double_series", 0.9).unwrap().mean - want).abs() < 1e-15);
        let want = 1.0 - 8.0 * q.powi(8) - 36.0 * q.powi(10);
        assert!((t.get("pi_squared_series", 0.9).unwrap().mean - want).abs() < 1e-15);

        let t = bowtie_split(&[0.95], 8, 2, 1, None).unwrap();
        let near_one = t.get("pi_bowtie_squared_series", 0.95).unwrap().mean;
        let doub = t.get("p_doub_series", 0.95).unwrap().mean;
        assert!(near_one > doub);
    }

    #[test]
    fn near_threshold_rows_are_flagged() {
        let t = dhex_three_way(&[pc(LatticeKind::Triangular)], 6, 2, 1, None).unwrap();
        assert!(t.get("theta_qep", t.grid[0]).unwrap().has_flag("near_pc"));
        assert!(t.get("diff_qep_minus_cep2", t.grid[0]).unwrap().has_flag("near_pc"));
        assert!(!t.get("theta_cep1", t.grid[0]).unwrap().has_flag("near_pc"));
    }
}
