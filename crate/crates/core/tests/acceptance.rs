//! Acceptance suite: one PASS/FAIL line per criterion, with its tolerance and timing.
//!
//! Runs as a plain binary (`harness = false`) and exits nonzero when any criterion fails.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use ccgeom::criteria::{
    ct, figure1_region, figure2_curves, lower_branch_intercept, lower_branch_min_k, r0, region_corner, upper_branch,
    GridConfig,
};
use ccgeom::curve::fixtures::{circle, cylinder_circle, latitude, lemniscate, sphere_circle, torus_lens};
use ccgeom::curve::{
    detect_node, embedded_lift_check, lift_contact, second_variation, split_at_node, DiscreteCurve, LiftContact,
    LiftVerdict, PerturbationFamily, TestFunction,
};
use ccgeom::geometry::{ConformalTorus, FlatTorus, Point, SurfaceModel, Vec2};
use ccgeom::minmax::fixtures::{dumbbell, figure_eight};
use ccgeom::minmax::{
    competitor_sweepout_config1, cut_and_paste, pull_tight_width, surgery_radius, CompetitorConfig, PullTightConfig,
    SurgerySign,
};
use ccgeom::shortening::{solve_on_surface, SolveRequest};
use ccgeom::Result;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String)>;

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Option<f64>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "figure 2 regression", budget: Some(1.0), run: figure2 },
        Criterion { id: 2, name: "figure 1 regression", budget: Some(5.0), run: figure1 },
        Criterion { id: 3, name: "inverse pair", budget: Some(0.1), run: inverse_pair },
        Criterion { id: 4, name: "flat-torus dichotomy", budget: Some(10.0), run: flat_torus },
        Criterion { id: 5, name: "sphere latitude solve", budget: Some(10.0), run: sphere_latitude },
        Criterion { id: 6, name: "second-variation oracle", budget: Some(30.0), run: second_variation_oracle },
        Criterion { id: 7, name: "node-term closed forms", budget: None, run: node_terms },
        Criterion { id: 8, name: "birkhoff property suite", budget: Some(60.0), run: birkhoff },
        Criterion { id: 9, name: "dumbbell width", budget: Some(120.0), run: dumbbell_width },
        Criterion { id: 10, name: "cut-and-paste decrease", budget: None, run: surgery },
        Criterion { id: 11, name: "gauss-bonnet closure", budget: None, run: gauss_bonnet },
        Criterion { id: 12, name: "capped cylinder", budget: None, run: capped_cylinder },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let (ok, detail) = (c.run)().unwrap_or_else(|e| (false, format!("error: {e}")));
        let elapsed = start.elapsed().as_secs_f64();
        let in_time = c.budget.is_none_or(|b| elapsed < b);
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let budget = c.budget.map_or(String::new(), |b| format!(" < {b} s"));
        let late = if in_time { "" } else { " OVER BUDGET" };
        println!(
            "{} {:>2} {:<26} [{elapsed:.3} s{budget}{late}] {detail}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Distance from `(x, y)` to the polyline through `points`.
fn polyline_distance(points: &[(f64, f64)], x: f64, y: f64) -> f64 {
    let p = Vec2::new(x, y);
    points
        .windows(2)
        .map(|w| {
            let a = Vec2::new(w[0].0, w[0].1);
            let b = Vec2::new(w[1].0, w[1].1);
            let t = ((p - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            (p - a - (b - a) * t).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

fn figure2() -> Check {
    let curves = figure2_curves(&GridConfig::default());
    let blue: Vec<(f64, f64)> = curves.iter().map(|p| (p.inj, p.c_blue)).collect();
    let red: Vec<(f64, f64)> = curves.iter().map(|p| (p.inj, p.c_red)).collect();
    let blue_points = [(0.20273, 5.0), (1.0, 1.3130), (2.0, 1.0373), (5.0, 1.0001)];
    let red_points = [(0.88282, 2.0), (2.0, 1.2854), (5.0, 1.56416), (10.0, 2.65708)];
    let worst_blue = blue_points.iter().map(|&(x, y)| polyline_distance(&blue, x, y)).fold(0.0, f64::max);
    let worst_red = red_points.iter().map(|&(x, y)| polyline_distance(&red, x, y)).fold(0.0, f64::max);
    let tol = 5e-3;
    Ok((
        worst_blue < tol && worst_red < tol,
        format!("largest distance blue {worst_blue:.2e}, red {worst_red:.2e} (tol {tol:.0e})"),
    ))
}

fn figure1() -> Check {
    let trace = figure1_region(&GridConfig::default())?;
    let upper_points = [(0.025, 0.291689), (0.05, 0.264142), (0.1, 0.205981)];
    let upper_curve: Vec<(f64, f64)> = trace.points.iter().map(|p| (p.min_k, p.c_upper)).collect();
    let upper = upper_points
        .iter()
        .map(|&(m, c)| (upper_branch(m) - c).abs().min(polyline_distance(&upper_curve, m, c)))
        .fold(0.0, f64::max);
    let lower_points = [(0.1026, 0.0875), (0.0893, 0.05)];
    let mut lower: f64 = 0.0;
    for (m, c) in lower_points {
        lower = lower.max((lower_branch_min_k(c)? - m).abs());
    }
    let (mc, cc) = region_corner()?;
    let corner = (mc - 0.1167).abs().max((cc - 0.1856).abs());
    let intercept = (lower_branch_intercept()? - 1.0 / 16.0).abs();
    let traced_corner = (trace.corner.0 - mc).abs().max((trace.corner.1 - cc).abs());
    let pass = upper < 2e-3 && lower < 3e-3 && corner < 2e-3 && intercept < 1e-4 && traced_corner == 0.0;
    Ok((
        pass,
        format!(
            "upper {upper:.2e} (tol 2e-3), lower {lower:.2e} (tol 3e-3), corner ({mc:.5}, {cc:.5}) off by {corner:.2e} (tol 2e-3), intercept off by {intercept:.2e} (tol 1e-4)"
        ),
    ))
}

fn inverse_pair() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut counts = [0usize; 3];
    for i in 0..100 {
        let c: f64 = rng.gen_range(0.05..5.0);
        let k = match i % 3 {
            0 => rng.gen_range(0.01..4.0),
            1 => 0.0,
            _ => -c * c * rng.gen_range(0.01..0.99),
        };
        counts[if k < 0.0 { 0 } else if k == 0.0 { 1 } else { 2 }] += 1;
        worst = worst.max((ct(k, r0(c, k)?)? - c).abs());
    }
    let covered = counts.iter().all(|&n| n > 0);
    Ok((
        worst < 1e-10 && covered,
        format!("100 pairs ({} k<0, {} k=0, {} k>0): largest |ct - c| {worst:.2e} (tol 1e-10)", counts[0], counts[1], counts[2]),
    ))
}

fn flat_torus() -> Check {
    let s = SurfaceModel::flat_square(2.0);
    let sol = solve_on_surface(&s, &SolveRequest::new(1.5))?;
    let length_err = (sol.length - 2.0 * PI / 1.5).abs();
    let embedded = matches!(sol.contact, LiftContact::Embedded { .. });
    let below = embedded_lift_check(&s, 0.9)?;
    let pass = embedded && sol.max_residual < 1e-3 && length_err < 1e-3 && below == LiftVerdict::NotEmbeddable;
    Ok((
        pass,
        format!(
            "c = 1.5: embedded {embedded}, residual {:.2e} (tol 1e-3), length error {length_err:.2e} (tol 1e-3); c = 0.9: {below:?}",
            sol.max_residual
        ),
    ))
}

fn sphere_latitude() -> Check {
    let s = SurfaceModel::sphere(1.0);
    let sol = solve_on_surface(&s, &SolveRequest::new(1.0))?;
    let rho = sol.region.boundary[0].vertices.iter().map(|p| (p.x - PI / 4.0).abs()).fold(0.0, f64::max);
    let length_err = (sol.length - PI * 2f64.sqrt()).abs();
    let q = sol.certificate.second_variation;
    Ok((
        rho < 1e-3 && length_err < 1e-3 && q < 0.0,
        format!("latitude off pi/4 by {rho:.2e}, length error {length_err:.2e} (tol 1e-3), second variation {q:.6}"),
    ))
}

fn second_variation_oracle() -> Check {
    let lattice = FlatTorus::square(4.0);
    let s = SurfaceModel::ConformalTorus(ConformalTorus::trig(lattice, 16, 0.1, 1.0, 1.0)?);
    let c = 1.0;
    let sol = solve_on_surface(&s, &SolveRequest { vertices: 256, ..SolveRequest::new(c) })?;
    let curve = &sol.region.boundary[0];
    let arc = arclength_fractions(&s, curve);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for _ in 0..5 {
        let a0: f64 = rng.gen_range(0.5..1.5);
        let modes: Vec<(f64, f64)> = (1..=3)
            .map(|m| {
                let decay = 1.0 / (m * m) as f64;
                (decay * rng.gen_range(-0.5..0.5), decay * rng.gen_range(-0.5..0.5))
            })
            .collect();
        let phi: Vec<f64> = arc
            .iter()
            .map(|t| {
                a0 + modes
                    .iter()
                    .enumerate()
                    .map(|(m, (a, b))| {
                        let w = 2.0 * PI * (m + 1) as f64 * t;
                        a * w.cos() + b * w.sin()
                    })
                    .sum::<f64>()
            })
            .collect();
        let q = second_variation(&s, curve, None, &TestFunction::new(phi.clone())?, c)?;
        let family = PerturbationFamily::from_region(&s, &sol.region, 0, phi)?;
        let f = |t: f64| family.functional(&s, t, c);
        let fd = (f(h)? - 2.0 * f(0.0)? + f(-h)?) / (h * h);
        let rel = ((q - fd) / fd).abs();
        worst = worst.max(rel);
        errors.push(format!("{rel:.1e}"));
    }
    Ok((
        worst < 1e-3,
        format!(
            "256-vertex solved curve, residual {:.1e}: relative errors [{}] (tol 1e-3)",
            sol.max_residual,
            errors.join(", ")
        ),
    ))
}

/// Fraction of the total length reached at each vertex.
fn arclength_fractions(s: &SurfaceModel, curve: &DiscreteCurve) -> Vec<f64> {
    let lengths = curve.segment_lengths(s);
    let total: f64 = lengths.iter().sum();
    let mut acc = 0.0;
    lengths
        .iter()
        .take(curve.len())
        .map(|l| {
            let t = acc / total;
            acc += l;
            t
        })
        .collect()
}

fn node_terms() -> Check {
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for alpha in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
        let c = 1.0;
        let flat = SurfaceModel::flat_square(40.0);
        let fx = lemniscate(c, alpha, 0.01);
        let node = detect_node(&flat, &fx.curve)?;
        let q = second_variation(&flat, &fx.curve, node.as_ref(), &TestFunction::constant(fx.curve.len(), 1.0), c)?;
        let expected = -fx.curve.length(&flat) * c * c - 4.0 * c / (alpha / 2.0).tan();
        worst1 = worst1.max(((q - expected) / expected).abs());

        let lens = torus_lens(c, alpha, 400);
        let Some(node) = detect_node(&lens.surface, &lens.curve)? else {
            return Ok((false, format!("no node on the lens at alpha {alpha:.4}")));
        };
        let (first, _) = split_at_node(&lens.curve, &node)?;
        let lengths = first.segment_lengths(&lens.surface);
        let big_l: f64 = lengths.iter().sum();
        let mut arc = vec![0.0];
        for l in &lengths {
            arc.push(arc.last().copied().unwrap_or(0.0) + l);
        }
        let per = lens.node_vertices.1;
        let phi = TestFunction::from_fn(lens.curve.len(), |i| if i < per { (PI * arc[i] / big_l).sin() } else { 0.0 })?;
        let q = second_variation(&lens.surface, &lens.curve, Some(&node), &phi, c)?;
        let expected = (PI * PI / (big_l * big_l) - c * c) * big_l / 2.0;
        worst2 = worst2.max(((q - expected) / expected).abs());
    }
    Ok((
        worst1 < 1e-3 && worst2 < 1e-3,
        format!("alpha in {{pi/3, pi/2, 2pi/3}}: config 1 rel. error {worst1:.2e}, config 2 rel. error {worst2:.2e} (tol 1e-3)"),
    ))
}

fn birkhoff() -> Check {
    let suite = ccgeom::checks::birkhoff_suite(8, 50, 3)?;
    let pass = suite.max_increase <= 1e-12
        && suite.max_fixed_point_displacement < 1e-6
        && suite.min_distance >= 0.1
        && suite.min_decrease > 0.0;
    Ok((
        pass,
        format!(
            "{} curves: max length change {:.2e} (roundoff tol 1e-12), fixed-point displacement {:.2e} (tol 1e-6), min distance {:.3}, uniform decrease {:.3e}",
            suite.cases, suite.max_increase, suite.max_fixed_point_displacement, suite.min_distance, suite.min_decrease
        ),
    ))
}

/// Shortest path from `p` to `q` through the region on a dense grid with 16 neighbour
/// directions; an edge is kept when sample points along it lie in the region.
fn grid_shortest_path(region: &ccgeom::curve::Region, p: Point, q: Point, lo: Point, hi: Point, spacing: f64) -> Option<f64> {
    let inside = |a: &Point, b: &Point| (1..8).all(|k| region.contains(&(a + (b - a) * (k as f64 / 8.0))));
    let mut graph: UnGraph<Point, f64> = UnGraph::new_undirected();
    let mut index: HashMap<(i64, i64), NodeIndex> = HashMap::new();
    let nx = ((hi.x - lo.x) / spacing).ceil() as i64;
    let ny = ((hi.y - lo.y) / spacing).ceil() as i64;
    let at = |i: i64, j: i64| Point::new(lo.x + i as f64 * spacing, lo.y + j as f64 * spacing);
    for i in 0..=nx {
        for j in 0..=ny {
            let x = at(i, j);
            if region.contains(&x) && region.distance_to_boundary(&x) > 1e-9 {
                index.insert((i, j), graph.add_node(x));
            }
        }
    }
    let steps = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)];
    for (&(i, j), &a) in &index {
        for (di, dj) in steps {
            if let Some(&b) = index.get(&(i + di, j + dj)) {
                let (pa, pb) = (graph[a], graph[b]);
                if inside(&pa, &pb) {
                    graph.add_edge(a, b, (pb - pa).norm());
                }
            }
        }
    }
    let grid: Vec<NodeIndex> = index.values().copied().collect();
    let mut attach = |end: Point| {
        let e = graph.add_node(end);
        for &g in &grid {
            let x = graph[g];
            if (x - end).norm() <= 2.5 * spacing && inside(&end, &x) {
                graph.add_edge(e, g, (x - end).norm());
            }
        }
        e
    };
    let (ps, qs) = (attach(p), attach(q));
    dijkstra(&graph, ps, Some(qs), |e| *e.weight()).get(&qs).copied()
}

fn dumbbell_width() -> Check {
    let fx = dumbbell(1.0, 2.0, 0.5, 0.05);
    let cfg = PullTightConfig { slices: 16, ..PullTightConfig::default() };
    let w = pull_tight_width(&fx.surface, &fx.region, &fx.first, &fx.second, &cfg)?;
    let Some(report) = w.pulled else {
        return Ok((false, "no pull-tight report".into()));
    };
    let Some(oracle) = grid_shortest_path(&fx.region, fx.p, fx.q, Point::new(-3.1, -1.1), Point::new(3.1, 1.1), 0.025) else {
        return Ok((false, "grid oracle found no path".into()));
    };
    let rel = (report.family_max - oracle).abs() / oracle;
    Ok((
        rel < 0.02 && report.family_residual < 1e-2,
        format!(
            "pulled width {:.6}, grid oracle {oracle:.6}: rel. error {rel:.2e} (tol 2e-2), slice residual {:.2e} (tol 1e-2)",
            report.family_max, report.family_residual
        ),
    ))
}

fn surgery() -> Check {
    let fx = figure_eight(1.0, PI / 2.0, 0.02);
    let curve = &fx.region.boundary[0];
    let phi = TestFunction::constant(curve.len(), 1.0);
    let rc = surgery_radius(&fx.surface, curve, &fx.node, fx.c);
    let mut smallest = f64::INFINITY;
    for i in 0..5 {
        let s = 0.02 * rc * i as f64;
        for j in 1..=5 {
            let r = rc * j as f64 / 6.0;
            for sign in [SurgerySign::Plus, SurgerySign::Minus] {
                let out = cut_and_paste(&fx.surface, &fx.region, &fx.node, &phi, s, r, sign, fx.c)?;
                smallest = smallest.min(out.perturbed_ac - out.ac);
            }
        }
    }
    let comp = competitor_sweepout_config1(&fx.surface, &fx.region, &fx.node, &phi, fx.c, &CompetitorConfig::default())?;
    Ok((
        smallest > 0.0 && comp.margin > 0.0,
        format!("5 x 5 grid, both signs: smallest decrease {smallest:.3e}; competitor margin {:.3e}", comp.margin),
    ))
}

fn gauss_bonnet() -> Check {
    let flat = SurfaceModel::flat_square(4.0);
    let sphere = SurfaceModel::sphere(1.0);
    let conformal = SurfaceModel::ConformalTorus(ConformalTorus::trig(FlatTorus::square(2.0), 16, 0.2, 1.0, 1.0)?);
    let square: Vec<Point> = (0..4)
        .flat_map(|side| {
            let corners = [Point::new(1.0, 1.0), Point::new(3.0, 1.0), Point::new(3.0, 3.0), Point::new(1.0, 3.0)];
            let (a, b) = (corners[side], corners[(side + 1) % 4]);
            (0..32).map(move |k| a + (b - a) * (k as f64 / 32.0))
        })
        .collect();
    let flower = |center: Point, radius: f64, n: usize| -> Result<DiscreteCurve> {
        let v = (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                center + Vec2::new(t.cos(), t.sin()) * radius * (1.0 + 0.2 * (3.0 * t).cos())
            })
            .collect();
        DiscreteCurve::closed(v, Vec2::zeros())
    };
    let cases: Vec<(&SurfaceModel, DiscreteCurve)> = vec![
        (&flat, circle(Point::new(2.0, 2.0), 1.0, 128)),
        (&flat, DiscreteCurve::closed(square, Vec2::zeros())?),
        (&flat, flower(Point::new(2.0, 2.0), 1.2, 256)?),
        (&sphere, latitude(0.5, 256)),
        (&sphere, latitude(1.1, 256)),
        (&sphere, latitude(2.0, 256)),
        (&sphere, sphere_circle(Point::new(1.2, 0.7), 0.5, 256, 0.0, true)),
        (&conformal, circle(Point::new(1.0, 1.0), 0.5, 256)),
        (&conformal, circle(Point::new(0.6, 1.3), 0.3, 256)),
        (&conformal, flower(Point::new(1.0, 1.0), 0.6, 256)?),
    ];
    let mut worst: f64 = 0.0;
    for (s, c) in &cases {
        worst = worst.max((c.gauss_bonnet_sum(s)? - 2.0 * PI).abs());
    }
    Ok((worst < 1e-3, format!("{} fixtures: largest deviation from 2 pi {worst:.2e} (tol 1e-3)", cases.len())))
}

fn capped_cylinder() -> Check {
    let s = SurfaceModel::capped_cylinder(8.0);
    let curve = cylinder_circle(PI / 2.0 + 4.0, 0.0, PI, 256);
    let kappa = curve.geodesic_curvature(&s)?;
    let residual = kappa.iter().map(|k| (k - 1.0 / PI).abs()).fold(0.0, f64::max);
    let contact = lift_contact(&s, &curve, 1e-9)?;
    let touching = matches!(contact, LiftContact::SelfTouching { .. });
    Ok((
        residual < 1e-3 && touching,
        format!("max |kappa - 1/pi| {residual:.2e} (tol 1e-3), lift contact {contact:?}"),
    ))
}
