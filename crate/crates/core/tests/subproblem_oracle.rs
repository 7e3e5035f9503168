mod common;

use common::{grid_max, lagrangian, random_sc_instance, rng};
use swipt_core::model::{f1, f2, DualPoint, ScSnapshot, Threshold};
use swipt_core::subproblem::{Branch, PositiveCase, ScSolver};

#[test]
fn solve_sc_beats_full_box_grid() {
    let mut r = rng(0x5eed);
    for k in 0..300 {
        let inst = random_sc_instance(&mut r, k);
        let solver = ScSolver::new(inst.peak_p, inst.peak_q);
        let sol = solver.solve_sc(&inst.sc, &inst.nu);
        let (gmax, gp, gq) = grid_max(&inst.sc, &inst.nu, inst.peak_p, 0.0, inst.peak_q, 201);
        let oracle_at_sol = lagrangian(sol.p, sol.q, &inst.sc, &inst.nu);
        assert!(
            (oracle_at_sol - sol.value).abs() <= 1e-10 * sol.value.abs().max(1.0),
            "instance {k}: reported {} vs recomputed {oracle_at_sol}",
            sol.value
        );
        assert!(
            sol.value >= gmax - 1e-4 * gmax.abs() - 1e-9,
            "instance {k} ({}): {} < grid {gmax} at ({gp}, {gq})",
            sol.case_label,
            sol.value
        );
        assert!((0.0..=inst.peak_p).contains(&sol.p) && (0.0..=inst.peak_q).contains(&sol.q));
    }
}

#[test]
fn positive_branch_beats_restricted_grid() {
    let mut r = rng(77);
    let mut checked = 0;
    for k in 0..400 {
        let inst = random_sc_instance(&mut r, k);
        let solver = ScSolver::new(inst.peak_p, inst.peak_q);
        let Some(sol) = solver.solve_positive_branch(&inst.sc, &inst.nu) else {
            continue;
        };
        let a = inst.sc.a_threshold.finite().unwrap();
        let (gmax, _, _) = grid_max(&inst.sc, &inst.nu, inst.peak_p, a, inst.peak_q, 201);
        assert!(sol.value >= gmax - 1e-4 * gmax.abs() - 1e-9, "instance {k}: {} < {gmax}", sol.value);
        checked += 1;
    }
    assert!(checked > 100, "only {checked} positive-branch instances");
}

#[test]
fn branch_consistency() {
    let mut r = rng(3);
    for k in 0..500 {
        let inst = random_sc_instance(&mut r, k);
        let solver = ScSolver::new(inst.peak_p, inst.peak_q);
        let sol = solver.solve_sc(&inst.sc, &inst.nu);
        let tol = 1e-8 * inst.peak_q;
        match (sol.branch, inst.sc.a_threshold) {
            (Branch::PositiveSecrecy, Threshold::Finite(a)) => assert!(sol.q >= a - tol),
            (Branch::PositiveSecrecy, Threshold::Unreachable) => panic!("positive branch on a degenerate subcarrier"),
            (Branch::ZeroSecrecy, Threshold::Finite(a)) => assert!(sol.q <= a.min(inst.peak_q) + tol),
            (Branch::ZeroSecrecy, Threshold::Unreachable) => assert!(sol.q <= inst.peak_q),
        }
    }
}

#[test]
fn case_predicates_are_exhaustive() {
    let mut r = rng(11);
    for k in 0..500 {
        let inst = random_sc_instance(&mut r, k);
        let solver = ScSolver::new(inst.peak_p, inst.peak_q);
        let Some(a) = inst.sc.a_threshold.finite().filter(|a| *a <= inst.peak_q) else {
            assert!(solver.positive_case(&inst.sc, &inst.nu).is_none());
            continue;
        };
        let at_a = f1(0.0, a, &inst.sc, &inst.nu);
        let at_peak = f1(0.0, inst.peak_q, &inst.sc, &inst.nu);
        let holds = [at_peak <= 0.0, at_a >= 0.0 && at_peak > 0.0, at_a < 0.0 && at_peak > 0.0];
        assert_eq!(holds.iter().filter(|h| **h).count(), 1);
        let expected = if holds[0] {
            PositiveCase::I
        } else if holds[1] {
            PositiveCase::II
        } else {
            PositiveCase::III
        };
        assert_eq!(solver.positive_case(&inst.sc, &inst.nu), Some(expected));
    }
}

#[test]
fn interior_solutions_are_stationary() {
    let mut r = rng(19);
    let mut interior = 0;
    for k in 0..2000 {
        let inst = random_sc_instance(&mut r, k);
        let solver = ScSolver::new(inst.peak_p, inst.peak_q);
        let sol = solver.solve_sc(&inst.sc, &inst.nu);
        let Threshold::Finite(a) = inst.sc.a_threshold else { continue };
        let margin_p = 1e-3 * inst.peak_p;
        let margin_q = 1e-3 * inst.peak_q;
        let inside = sol.branch == Branch::PositiveSecrecy
            && sol.p > margin_p
            && sol.p < inst.peak_p - margin_p
            && sol.q > a + margin_q
            && sol.q < inst.peak_q - margin_q;
        if !inside {
            continue;
        }
        interior += 1;
        let n1 = f1(0.0, a, &inst.sc, &inst.nu).abs() + 1.0;
        let n2 = f2(0.0, a, &inst.sc, &inst.nu).abs() + 1.0;
        // The profile search leaves q accurate to the golden-section bracket.
        let g1 = f1(sol.p, sol.q, &inst.sc, &inst.nu).abs() / n1;
        let g2 = f2(sol.p, sol.q, &inst.sc, &inst.nu).abs() / n2;
        assert!(g1 <= 1e-4, "instance {k}: |f1| {g1}");
        assert!(g2 <= 1e-4, "instance {k}: |f2| {g2}");
    }
    eprintln!("interior solutions checked: {interior}");
}

#[test]
fn documented_corner_cases() {
    let s2 = 1e-9;
    // Strong Eve, β > μ g_e and a huge λ: Case I at q = A.
    let sc = ScSnapshot::new(1e-6, 4e-6, 1e-6, 0.0, 1e-6, s2);
    let a = sc.a_threshold.finite().unwrap();
    let nu = DualPoint::new(1e7, 10.0, 1.0);
    let solver = ScSolver::new(0.01, 0.01);
    let pos = solver.solve_positive_branch(&sc, &nu).unwrap();
    assert_eq!((pos.p, pos.q, pos.case_label), (0.0, a, "I"));

    // No eavesdropper channel: full power, no jamming.
    let sc = ScSnapshot::new(1e-6, 0.0, 1e-6, 0.0, 1e-6, s2);
    let sol = solver.solve_sc(&sc, &DualPoint::default());
    assert_eq!((sol.p, sol.q), (0.01, 0.0));
    assert_eq!(sol.case_label, "II-i");

    // Threshold beyond the jamming peak: only the zero branch remains.
    let sc = ScSnapshot::new(1e-9, 1e-3, 1e-6, 0.0, 1e-9, s2);
    assert!(sc.a_threshold.finite().unwrap() > 0.01);
    let sol = solver.solve_sc(&sc, &DualPoint::new(1.0, 1.0, 1.0));
    assert_eq!(sol.branch, Branch::ZeroSecrecy);
}
