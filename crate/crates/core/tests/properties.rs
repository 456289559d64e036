use approx::assert_relative_eq;
use proptest::prelude::*;

use ssmlab::harness::{bound_general, BoundInputs};
use ssmlab::metric::{embed, kernel_cosine, EmbeddingSpec};
use ssmlab::ssm::{discretize_entry, Method, C64};
use ssmlab::stagewise::{delta_schedule, subsample_index, subsample_pool, StageSchedule, Strategy as Subsampling};

fn strides() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(2usize..64, 0..5).prop_map(|set| {
        let mut v: Vec<usize> = set.into_iter().rev().collect();
        v.push(1);
        v
    })
}

proptest! {
    #[test]
    fn final_stage_delta_is_initial_over_first_stride(s in strides(), d0 in 1e-4f64..1.0) {
        let r1 = s[0] as f64;
        let sched = StageSchedule::uniform(s, 2, Subsampling::Pooling).unwrap();
        let deltas = delta_schedule(&sched, d0).unwrap();
        prop_assert_eq!(deltas[0], d0);
        assert_relative_eq!(*deltas.last().unwrap(), d0 / r1, max_relative = 1e-15);
    }

    #[test]
    fn pooling_preserves_the_mean_of_full_blocks(
        blocks in prop::collection::vec(prop::collection::vec(-10f64..10.0, 3), 1..40),
    ) {
        let flat: Vec<f64> = blocks.concat();
        let pooled = subsample_pool(&flat, 3).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert_relative_eq!(mean(&pooled), mean(&flat), epsilon = 1e-12);
    }

    #[test]
    fn indexing_length_is_ceiling(len in 1usize..500, r in 1usize..20) {
        let seq: Vec<usize> = (0..len).collect();
        let sub = subsample_index(&seq, r).unwrap();
        prop_assert_eq!(sub.len(), len.div_ceil(r));
        prop_assert!(sub.iter().enumerate().all(|(i, &v)| v == i * r));
    }

    #[test]
    fn zoh_matches_scalar_closed_form(re in -5f64..-0.01, im in -20f64..20.0, step in 1e-4f64..0.5) {
        let a = C64::new(re, im);
        let (abar, beta) = discretize_entry(a, step, Method::Zoh);
        let exact = (a * step).exp();
        prop_assert!((abar - exact).norm() < 1e-14);
        prop_assert!((beta - (exact - 1.0) / a).norm() < 1e-12 * beta.norm().max(1e-3));
    }

    #[test]
    fn bilinear_is_stable_for_stable_poles(re in -50f64..-1e-6, im in -50f64..50.0, step in 1e-4f64..1.0) {
        let (abar, _) = discretize_entry(C64::new(re, im), step, Method::Bilinear);
        prop_assert!(abar.norm() < 1.0);
    }

    #[test]
    fn general_bound_grows_with_input_b_and_delta_lipschitz_constants(
        base in 0.1f64..2.0, bump in 0.01f64..1.0, which in 0usize..4,
    ) {
        let mut b = BoundInputs {
            l_u: base, l_b: base, l_c: base, l_delta: base,
            m_u: base, m_b: base, m_c: base, m_delta: base, a_norm: base,
        };
        let before = bound_general(&b).unwrap();
        match which {
            0 => b.l_u += bump,
            1 => b.l_b += bump,
            2 => b.l_delta += bump,
            _ => {
                // the output map is read at the sample instant, so L_C does not enter
                b.l_c += bump;
                prop_assert_eq!(bound_general(&b).unwrap(), before);
                return Ok(());
            }
        }
        prop_assert!(bound_general(&b).unwrap() > before);
    }

    #[test]
    fn embeddings_are_unit_vectors_with_bounded_similarity(
        seed in any::<u64>(), u in -1f64..1.0, v in -1f64..1.0, eta in 0f64..1.0,
    ) {
        let spec = EmbeddingSpec::random(seed);
        let (x, y) = (embed(u, eta, &spec).unwrap(), embed(v, eta, &spec).unwrap());
        let k = kernel_cosine(&x, &y);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&k));
        prop_assert!((kernel_cosine(&x, &x) - 1.0).abs() < 1e-12 || x.iter().all(|c| c.abs() < 1e-15));
    }
}
