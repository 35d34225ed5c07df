use std::collections::BTreeSet;

use proptest::prelude::*;

use dirstep::hypothesis::{DecisionSet, Family, FamilyLayout, Hypothesis, NullKind, ParameterVector};
use dirstep::metrics::{estimate, tally, Metric};
use dirstep::procedures::{
    bauer_bonferroni, conventional_holm_2n, directional_holm, proc1_prime, proc1_prime_level, proc1_two_stage,
    proc2_modified_two_stage, proc2_stage2_threshold, proc3_stepdown, proc4_block, proc5_hochberg_directional,
    proc6_bh, proc7_between_block_bh, proc8_within_block_bh, proc9_positive_dep_bh, ProcedureId, ProcedureSpec,
};
use dirstep::pvalue::{pair_is_exact, NullDistribution, PairedPValues, StatisticVector};
use dirstep::stepwise::{make_schedule, stepdown, stepup, CriticalSchedule, ScheduleKind};
use dirstep::{proc1_exact_fwer, stepdown_bruteforce, stepup_bruteforce};

/// p-values with a fair share of exact ties and tiny values.
fn pvalue() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => 0.0f64..=1.0,
        1 => prop::sample::select(vec![0.0, 1e-6, 0.001, 0.01, 0.0125, 0.025, 0.05, 0.5, 1.0]),
    ]
}

fn schedule(m: usize) -> impl Strategy<Value = CriticalSchedule<f64>> {
    prop::collection::vec(1e-4f64..0.3, m).prop_map(|mut c| {
        c.sort_by(f64::total_cmp);
        CriticalSchedule::custom(c).unwrap()
    })
}

fn p_and_schedule() -> impl Strategy<Value = (Vec<f64>, CriticalSchedule<f64>)> {
    (1usize..=16).prop_flat_map(|m| (prop::collection::vec(pvalue(), m), schedule(m)))
}

/// Statistics mixing nulls and signals of both signs.
fn statistics() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            3 => -4.0f64..4.0,
            1 => prop::sample::select(vec![0.0, 2.5, -2.5, 6.0, -6.0]),
        ],
        1..=12,
    )
}

fn paired() -> impl Strategy<Value = PairedPValues<f64>> {
    statistics().prop_map(|t| StatisticVector::new(t, NullDistribution::StandardNormal).unwrap().paired())
}

fn level() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.05), Just(0.1), 0.001f64..0.45]
}

fn subset(a: &DecisionSet, b: &DecisionSet) -> bool {
    a.rejected().is_subset(b.rejected())
}

fn layout_for(n: usize, size: usize) -> FamilyLayout {
    let size = (1..=size.clamp(1, n)).rev().find(|d| n.is_multiple_of(*d)).unwrap();
    FamilyLayout::contiguous(n, size).unwrap()
}

type Proc = fn(&PairedPValues<f64>, f64) -> dirstep::Result<DecisionSet>;

fn run(id: ProcedureId, p: &PairedPValues<f64>, alpha: f64, layout: &FamilyLayout) -> DecisionSet {
    let l = id.needs_layout().then(|| layout.clone());
    ProcedureSpec::new(id, alpha, l).unwrap().apply(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fast_executors_match_bruteforce((p, s) in p_and_schedule()) {
        prop_assert_eq!(stepdown(&p, &s).unwrap(), stepdown_bruteforce(&p, &s).unwrap());
        prop_assert_eq!(stepup(&p, &s).unwrap(), stepup_bruteforce(&p, &s).unwrap());
    }

    #[test]
    fn stepdown_within_stepup((p, s) in p_and_schedule()) {
        let down = stepdown(&p, &s).unwrap();
        let up = stepup(&p, &s).unwrap();
        let up_set: BTreeSet<_> = up.rejected_indices.iter().collect();
        prop_assert!(down.rejected_indices.iter().all(|i| up_set.contains(i)));
    }

    #[test]
    fn lowering_a_pvalue_never_loses_rejections((p, s) in p_and_schedule(), k in any::<prop::sample::Index>(), f in 0.0f64..1.0) {
        let mut q = p.clone();
        let i = k.index(q.len());
        q[i] *= f;
        prop_assert!(stepdown(&q, &s).unwrap().rejected_count >= stepdown(&p, &s).unwrap().rejected_count);
        prop_assert!(stepup(&q, &s).unwrap().rejected_count >= stepup(&p, &s).unwrap().rejected_count);
    }

    #[test]
    fn permutation_equivariance((p, s) in p_and_schedule(), perm_seed in any::<u64>()) {
        let distinct: BTreeSet<u64> = p.iter().map(|x| x.to_bits()).collect();
        prop_assume!(distinct.len() == p.len());
        let m = p.len();
        let mut perm: Vec<usize> = (0..m).collect();
        // Deterministic shuffle from the seed.
        let mut state = perm_seed | 1;
        for i in (1..m).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let q: Vec<f64> = perm.iter().map(|&j| p[j]).collect();
        for (a, b) in [(stepdown(&p, &s).unwrap(), stepdown(&q, &s).unwrap()), (stepup(&p, &s).unwrap(), stepup(&q, &s).unwrap())] {
            let mapped: BTreeSet<usize> = b.rejected_indices.iter().map(|&i| perm[i]).collect();
            let orig: BTreeSet<usize> = a.rejected_indices.into_iter().collect();
            prop_assert_eq!(mapped, orig);
        }
    }

    #[test]
    fn pairing_is_exact(t in prop::collection::vec(-1e6f64..1e6, 1..20), small in prop::collection::vec(-40.0f64..40.0, 1..20)) {
        for dist in [NullDistribution::StandardNormal, NullDistribution::StandardCauchy, NullDistribution::UniformSymmetric] {
            for v in [&t, &small] {
                let p = StatisticVector::new(v.clone(), dist).unwrap().paired();
                prop_assert!(p.first_pairing_violation().is_none());
                for i in 0..p.n() {
                    let (a, b) = p.pair(i);
                    prop_assert!(pair_is_exact(a, b));
                    prop_assert!((0.0..=1.0).contains(&a));
                }
            }
        }
    }

    #[test]
    fn every_procedure_gives_one_claim_per_parameter(p in paired(), alpha in level(), size in 1usize..5) {
        let layout = layout_for(p.n(), size);
        for id in ProcedureId::ALL {
            let d = run(id, &p, alpha, &layout);
            prop_assert_eq!(d.family(), id.family());
            for i in 0..p.n() {
                let up = d.is_rejected(Hypothesis::new(i, NullKind::NonPositive));
                let down = d.is_rejected(Hypothesis::new(i, NullKind::Positive))
                    || d.is_rejected(Hypothesis::new(i, NullKind::Zero));
                prop_assert!(!(up && down), "{} claims both signs for parameter {}", id, i + 1);
            }
        }
    }

    #[test]
    fn dominance_chain(p in paired(), alpha in level()) {
        prop_assert!(subset(&conventional_holm_2n(&p, alpha).unwrap(), &proc3_stepdown(&p, alpha).unwrap()));
        prop_assert!(subset(&bauer_bonferroni(&p, alpha).unwrap(), &proc2_modified_two_stage(&p, alpha).unwrap()));
        prop_assert!(subset(&proc1_prime(&p, alpha).unwrap(), &proc1_two_stage(&p, alpha).unwrap()));
    }

    #[test]
    fn block_reductions(p in paired(), alpha in level()) {
        let n = p.n();
        let one = FamilyLayout::single(n).unwrap();
        let singles = FamilyLayout::singletons(n).unwrap();
        prop_assert_eq!(proc4_block(&p, alpha, &one).unwrap(), proc3_stepdown(&p, alpha).unwrap());
        prop_assert_eq!(proc7_between_block_bh(&p, alpha, &one).unwrap(), proc6_bh(&p, alpha).unwrap());
        prop_assert_eq!(proc8_within_block_bh(&p, alpha, &singles).unwrap(), proc6_bh(&p, alpha).unwrap());
    }

    #[test]
    fn singleton_blocks_are_bonferroni(p in paired(), alpha in level()) {
        let n = p.n();
        let d = proc4_block(&p, alpha, &FamilyLayout::singletons(n).unwrap()).unwrap();
        let c = alpha / (n as f64 + alpha);
        for (k, &x) in p.values().iter().enumerate() {
            // Two algebraically equal forms of the constant may round apart.
            if (x - c).abs() <= 1e-12 * c {
                continue;
            }
            let h = if k < n { Hypothesis::new(k, NullKind::NonPositive) } else { Hypothesis::new(k - n, NullKind::Positive) };
            prop_assert_eq!(d.is_rejected(h), x <= c);
        }
    }

    #[test]
    fn proc5_second_step_is_hochberg(p in paired(), alpha in level()) {
        let n = p.n();
        let d = proc5_hochberg_directional(&p, alpha).unwrap();
        let hochberg = stepup(p.lower(), &make_schedule(ScheduleKind::Hochberg, n, alpha / 2.0).unwrap()).unwrap();
        let expect: BTreeSet<usize> = hochberg.rejected_indices.into_iter().collect();
        for kind in [NullKind::Positive, NullKind::Zero] {
            let got: BTreeSet<usize> = (0..n).filter(|&i| d.is_rejected(Hypothesis::new(i, kind))).collect();
            prop_assert_eq!(&got, &expect);
        }
    }

    #[test]
    fn alpha_monotone(p in paired(), a in 0.001f64..0.45, b in 0.001f64..0.45, size in 1usize..5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let layout = layout_for(p.n(), size);
        let procs: [Proc; 6] =
            [proc3_stepdown, proc6_bh, proc9_positive_dep_bh, bauer_bonferroni, conventional_holm_2n, directional_holm];
        for f in procs {
            prop_assert!(subset(&f(&p, lo).unwrap(), &f(&p, hi).unwrap()));
        }
        prop_assert!(subset(
            &proc7_between_block_bh(&p, lo, &layout).unwrap(),
            &proc7_between_block_bh(&p, hi, &layout).unwrap()
        ));
        let n = p.n();
        prop_assert!(proc1_prime_level(n, lo) <= proc1_prime_level(n, hi));
        for r in 0..n {
            prop_assert!(proc2_stage2_threshold(n, r, lo) <= proc2_stage2_threshold(n, r, hi));
        }
    }

    #[test]
    fn tally_invariant_under_relabeling(t in statistics(), theta_pick in prop::collection::vec(prop::sample::select(vec![0.0, 0.5, -0.5, 2.0, -2.0]), 12), alpha in level(), shift in 0usize..12) {
        let n = t.len();
        let theta = ParameterVector::new(theta_pick[..n].to_vec()).unwrap();
        let p = StatisticVector::new(t.clone(), NullDistribution::StandardNormal).unwrap().paired();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let t2: Vec<f64> = perm.iter().map(|&j| t[j]).collect();
        let theta2 = ParameterVector::new(perm.iter().map(|&j| theta.get(j)).collect()).unwrap();
        let p2 = StatisticVector::new(t2, NullDistribution::StandardNormal).unwrap().paired();
        for id in [ProcedureId::P3, ProcedureId::P5, ProcedureId::P6, ProcedureId::CombinedF] {
            let a = tally(&run(id, &p, alpha, &FamilyLayout::single(n).unwrap()), &theta).unwrap();
            let b = tally(&run(id, &p2, alpha, &FamilyLayout::single(n).unwrap()), &theta2).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.is_consistent() && a.union_bound_holds());
        }
    }

    #[test]
    fn estimates_lie_on_the_grid(us in prop::collection::vec((0usize..4, 0usize..6), 1..50)) {
        let tallies: Vec<_> = us
            .iter()
            .map(|&(u, extra)| dirstep::ErrorTally { v_check: u, u_check: u, r_check: u + extra, ..Default::default() })
            .collect();
        let m = tallies.len() as f64;
        let fwer = estimate(&tallies, Metric::MdFwer, Family::F1).unwrap();
        prop_assert!((fwer.estimate * m - (fwer.estimate * m).round()).abs() < 1e-9);
        let fdr = estimate(&tallies, Metric::MdFdr, Family::F1).unwrap();
        prop_assert!((0.0..=1.0).contains(&fdr.estimate));
        prop_assert!(fwer.se >= 0.0 && fdr.se >= 0.0);
    }

    #[test]
    fn exact_fwer_increases_with_alpha(n in 1usize..60, a in 0.001f64..0.45, b in 0.001f64..0.45) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(proc1_exact_fwer(n, lo).unwrap() < proc1_exact_fwer(n, hi).unwrap());
    }
}

#[test]
fn f32_pipeline_agrees_away_from_thresholds() {
    let t32 = vec![3.1f32, -0.4, 2.2, -2.9, 0.0, 1.1];
    let t64: Vec<f64> = t32.iter().map(|&x| f64::from(x)).collect();
    let p32 = StatisticVector::new(t32, NullDistribution::StandardNormal).unwrap().paired();
    let p64 = StatisticVector::new(t64, NullDistribution::StandardNormal).unwrap().paired();
    for id in [ProcedureId::P1, ProcedureId::P3, ProcedureId::P5, ProcedureId::P6, ProcedureId::P9] {
        let a = ProcedureSpec::new(id, 0.05f32, None).unwrap().apply(&p32).unwrap();
        let b = ProcedureSpec::new(id, 0.05f64, None).unwrap().apply(&p64).unwrap();
        assert_eq!(a, b, "{id}");
    }
}
