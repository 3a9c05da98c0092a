//! Library results against independent brute-force computations.

use rand::seq::SliceRandom;
use rand::Rng;

use tsppc_core::exact::{exact_oracle, DEFAULT_NODE_LIMIT};
use tsppc_core::generator::{generate, Direction, GeneratorConfig};
use tsppc_core::geometry::convex_hull;
use tsppc_core::heuristics::{
    achci_run, achci_with, insertion_ratio, nearest_neighbor, AchciOptions, ArcRule, Evaluation,
    Orientation, Subtour,
};
use tsppc_core::io::TsplibPointCloud;
use tsppc_core::milp::{MilpModel, MilpOptions};
use tsppc_core::model::{tour_cost, validate_tour, Commodity, Instance, Metric, NodeId, Point};
use tsppc_core::random::{random_instance, seeded, RandomSpec};

fn permutations(items: &[NodeId]) -> Vec<Vec<NodeId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn full_orders(inst: &Instance) -> Vec<Vec<NodeId>> {
    let locs: Vec<NodeId> = inst.locations().collect();
    permutations(&locs)
        .into_iter()
        .map(|p| {
            let mut o = vec![0];
            o.extend(p);
            o.push(inst.end());
            o
        })
        .collect()
}

/// Every parent strictly before each of its children, by position only.
fn precedence_by_position(inst: &Instance, order: &[NodeId]) -> bool {
    let pos = |n: NodeId| order.iter().position(|&x| x == n).unwrap();
    inst.precedence()
        .pairs()
        .iter()
        .all(|&(p, c)| pos(p) < pos(c))
}

fn euclid(a: &Point, b: &Point) -> f64 {
    ((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)).sqrt()
}

#[test]
fn cost_is_symmetric_on_random_pairs() {
    let mut rng = seeded(11);
    let inst = random_instance(&mut rng, &RandomSpec::pairs(30).with_extent(1000));
    for _ in 0..100 {
        let i = rng.gen_range(0..inst.node_count());
        let j = rng.gen_range(0..inst.node_count());
        assert_eq!(inst.cost(i, j), inst.cost(j, i));
    }
    for i in 0..inst.node_count() {
        assert_eq!(inst.cost(i, 0), inst.cost(i, inst.end()));
    }
}

#[test]
fn tour_cost_matches_separate_summation() {
    let mut rng = seeded(12);
    for _ in 0..20 {
        let inst = random_instance(&mut rng, &RandomSpec::pairs(3).with_metric(Metric::Euc2dContinuous));
        let mut mid: Vec<NodeId> = inst.locations().collect();
        mid.shuffle(&mut rng);
        let order: Vec<NodeId> = std::iter::once(0).chain(mid).chain([inst.end()]).collect();
        assert_eq!(order.len(), 8);
        let mut expected = 0.0;
        let mut k = order.len() - 1;
        // summed back to front from raw coordinates
        while k > 0 {
            expected += euclid(&inst.point(order[k]), &inst.point(order[k - 1]));
            k -= 1;
        }
        let got = tour_cost(&inst, &order).unwrap();
        assert!((got - expected).abs() < 1e-9 * expected.max(1.0), "{got} vs {expected}");
    }
}

#[test]
fn validation_matches_position_check_on_all_orders() {
    // P1 -> D1 plus a lone pickup P2 whose delivery D2 is fixed last
    let p = Point::new;
    let inst = Instance::new(
        "six",
        p(0.0, 0.0),
        vec![p(1.0, 0.0), p(2.0, 0.0), p(3.0, 0.0), p(4.0, 0.0)],
        vec![
            Commodity::new(0, vec![(1, 1.0), (2, -1.0)]),
            Commodity::new(1, vec![(3, 1.0), (4, -1.0)]),
        ],
        Metric::Euc2dRounded,
    )
    .unwrap();
    let mut feasible = 0;
    for perm in permutations(&[1, 2, 3]) {
        let mut order = vec![0];
        order.extend(perm);
        order.extend([4, 5]);
        let report = validate_tour(&inst, &order).unwrap();
        assert_eq!(report.is_feasible(), precedence_by_position(&inst, &order), "{order:?}");
        feasible += usize::from(report.is_feasible());
    }
    assert_eq!(feasible, 3);
}

/// Hull vertices by definition: all other points lie strictly on one side
/// of the line through two vertices, checked for every pair.
fn hull_oracle(points: &[Point]) -> Vec<usize> {
    let n = points.len();
    let mut on = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || points[i] == points[j] {
                continue;
            }
            let (a, b) = (&points[i], &points[j]);
            let left = (0..n).all(|k| {
                let c = (b.x - a.x) * (points[k].y - a.y) - (b.y - a.y) * (points[k].x - a.x);
                let between = (points[k].x - a.x) * (b.x - points[k].x) + (points[k].y - a.y) * (b.y - points[k].y);
                c > 0.0 || (c == 0.0 && (points[k] == *a || points[k] == *b || between > 0.0))
            });
            if left {
                on[i] = true;
                on[j] = true;
            }
        }
    }
    let mut out: Vec<usize> = (0..n).filter(|&i| on[i]).collect();
    // coincident copies collapse to the smallest index
    out.retain(|&i| !(0..i).any(|k| points[k] == points[i]));
    out
}

#[test]
fn hull_matches_half_plane_oracle() {
    let mut rng = seeded(13);
    for round in 0..40 {
        let extent = if round % 2 == 0 { 1000 } else { 12 };
        let points: Vec<Point> = (0..50)
            .map(|_| Point::new(rng.gen_range(0..=extent) as f64, rng.gen_range(0..=extent) as f64))
            .collect();
        let mut got = convex_hull(&points).unwrap();
        got.sort_unstable();
        assert_eq!(got, hull_oracle(&points), "round {round}");
    }
}

#[test]
fn ratio_matches_formula_on_random_triples() {
    let mut rng = seeded(14);
    let inst = random_instance(&mut rng, &RandomSpec::pairs(40).with_extent(500).with_metric(Metric::Euc2dContinuous));
    let mut checked = 0;
    while checked < 200 {
        let (i, j, k) = (
            rng.gen_range(0..inst.node_count()),
            rng.gen_range(0..inst.node_count()),
            rng.gen_range(0..inst.node_count()),
        );
        let (pi, pj, pk) = (inst.point(i), inst.point(j), inst.point(k));
        let den = euclid(&pi, &pj);
        if i == j || j == k || i == k || den == 0.0 {
            continue;
        }
        let expected = (euclid(&pi, &pk) + euclid(&pk, &pj)) / den;
        let got = insertion_ratio(&inst, i, j, k);
        assert!((got - expected).abs() <= 1e-12 * expected, "{got} vs {expected}");
        checked += 1;
    }
}

#[test]
fn segment_is_intersection_of_parent_tails() {
    let mut rng = seeded(15);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, &RandomSpec::mixed(8));
        let mut members: Vec<NodeId> = inst.locations().filter(|_| rng.gen_bool(0.6)).collect();
        members.shuffle(&mut rng);
        let mut order = vec![0];
        order.extend(members);
        order.push(inst.end());
        let sub = Subtour::new(inst.node_count(), order.clone());
        for k in inst.locations().filter(|&k| !sub.contains(k)) {
            let arcs = order.len() - 1;
            // arc a is allowed iff it lies in every parent's tail
            let mut allowed = vec![true; arcs];
            for &p in inst.precedence().parents_of(k) {
                match order.iter().position(|&x| x == p) {
                    None => allowed.iter_mut().for_each(|a| *a = false),
                    Some(pp) => (0..pp).for_each(|a| allowed[a] = false),
                }
            }
            let expected: Vec<usize> = (0..arcs).filter(|&a| allowed[a]).collect();
            let got: Vec<usize> = sub.feasible_segment(k, inst.precedence()).collect();
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn incremental_equals_naive_on_random_instances() {
    let mut rng = seeded(16);
    for round in 0..100 {
        let tasks = rng.gen_range(1..40);
        let extent = if round % 3 == 0 { 10 } else { 1000 };
        let inst = random_instance(&mut rng, &RandomSpec::mixed(tasks).with_extent(extent));
        for rule in [ArcRule::Detour, ArcRule::Ratio] {
            for orientation in [Orientation::AsBuilt, Orientation::Reversed] {
                let naive = achci_run(&inst, orientation, &AchciOptions::sequential(Evaluation::Naive).with_arc_rule(rule)).unwrap();
                let inc = achci_run(&inst, orientation, &AchciOptions::sequential(Evaluation::Incremental).with_arc_rule(rule)).unwrap();
                assert_eq!(naive.steps, inc.steps, "round {round} {rule:?} {orientation}");
                assert_eq!(naive.tour, inc.tour);
                let par = achci_run(&inst, orientation, &AchciOptions { parallel: true, ..AchciOptions::sequential(Evaluation::Naive).with_arc_rule(rule) }).unwrap();
                assert_eq!(naive.steps, par.steps);
            }
        }
    }
}

fn exhaustive_optimum(inst: &Instance) -> f64 {
    full_orders(inst)
        .into_iter()
        .filter(|o| precedence_by_position(inst, o))
        .map(|o| tour_cost(inst, &o).unwrap())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn exact_matches_exhaustive_search() {
    let mut rng = seeded(17);
    for _ in 0..30 {
        let tasks = rng.gen_range(1..=3);
        let inst = random_instance(&mut rng, &RandomSpec::pairs(tasks));
        let sol = exact_oracle(&inst, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(sol.tour.cost(), exhaustive_optimum(&inst));
        assert!(validate_tour(&inst, sol.tour.order()).unwrap().is_feasible());
        assert!(nearest_neighbor(&inst).unwrap().cost() >= sol.tour.cost());
        assert!(achci_with(&inst, &AchciOptions::default()).unwrap().cost() >= sol.tour.cost());
    }
}

#[test]
fn generator_five_collinear_points() {
    let cloud = TsplibPointCloud {
        name: "line5".into(),
        dimension: 5,
        coords: (0..5).map(|x| Point::new(x as f64, 0.0)).collect(),
        ids: (1..=5).collect(),
    };
    let inst = generate(&cloud, GeneratorConfig::new(Direction::ChildrenCentral)).unwrap();
    // by hand: centroid x = 2; ranks by distance with file order on ties:
    // x=2, x=1, x=3, x=0, x=4 -> nodes 0..4; pairs (rank5 < rank2), (rank4 < rank3)
    assert_eq!(inst.point(0), Point::new(2.0, 0.0));
    assert_eq!(
        (1..=4).map(|n| inst.point(n).x).collect::<Vec<_>>(),
        vec![1.0, 3.0, 0.0, 4.0]
    );
    assert_eq!(inst.precedence().pairs(), vec![(3, 2), (4, 1)]);
    for c in inst.commodities() {
        let mut q: Vec<f64> = c.payloads.iter().map(|&(_, q)| q).collect();
        q.sort_by(f64::total_cmp);
        assert_eq!(q, vec![-1.0, 1.0]);
    }
}

#[test]
fn milp_substitution_on_all_two_task_orders() {
    let mut rng = seeded(18);
    for round in 0..5 {
        let spec = if round == 0 { RandomSpec::pairs(2) } else { RandomSpec::mixed(2) };
        let inst = random_instance(&mut rng, &spec);
        for sparse in [false, true] {
            let model = MilpModel::build(&inst, &MilpOptions { sparse, ..MilpOptions::default() }).unwrap();
            for order in full_orders(&inst) {
                let values = model.assignment_for_order(&inst, &order);
                let ok = model.is_satisfied_by(&values, 1e-9);
                assert_eq!(ok, precedence_by_position(&inst, &order), "{order:?} sparse={sparse}");
                if ok {
                    assert!((model.objective_value(&values) - tour_cost(&inst, &order).unwrap()).abs() < 1e-9);
                }
            }
        }
    }
}
