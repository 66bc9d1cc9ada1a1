use cubesec::frame::{
    cross_product_frame, det_rank_one, frame_edit, frame_from_subspace, random_frame, random_tight_frame,
    subspace_from_frame, whiten, FrameEdit, UpdateSign, CROSS_PRODUCT_CAP,
};
use cubesec::linalg::{dot, norm, SymMatrix};
use cubesec::{Frame, Tolerances};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4).prop_flat_map(|k| (Just(k), k + 1..=10)).prop_map(|(k, n)| (n, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn whitening_yields_a_tight_frame(seed in any::<u64>(), (n, k) in shape()) {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = random_frame(&mut rng, n, k);
        let (b, tight) = whiten(&frame, &tol).unwrap();
        prop_assert!(tight.operator().identity_deviation() <= 1e-10);
        // B = A^{-1/2}: B A B = I.
        let a = frame.operator().to_dmatrix();
        let bm = b.to_dmatrix();
        let id = &bm * a * &bm;
        prop_assert!((id - nalgebra::DMatrix::identity(k, k)).amax() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rank_one_determinant_matches_direct(seed in any::<u64>(), (n, k) in shape(), scale in 0.01f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_frame(&mut rng, n, k).operator();
        let u: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        // Keep A − uuᵀ positive definite: |A^{-1/2}u| < 1.
        let len = norm(&a.inverse_sqrt(0.0).unwrap().apply(&u));
        let u: Vec<f64> = u.iter().map(|x| x * scale / len).collect();
        for (sign, s) in [(UpdateSign::Plus, 1.0), (UpdateSign::Minus, -1.0)] {
            let mut direct = a.clone();
            direct.add_outer(&u, s);
            let expect = direct.det();
            let got = det_rank_one(&a, &u, sign).unwrap();
            prop_assert!((got - expect).abs() <= 1e-9 * expect.abs().max(a.det()), "{got} vs {expect}");
        }
    }

    #[test]
    fn removal_then_whitening_stretches_along_the_removed_vector(
        seed in any::<u64>(),
        (n, k) in shape(),
        which in any::<prop::sample::Index>(),
    ) {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = random_tight_frame(&mut rng, n + 1, k);
        let i = which.index(frame.n());
        let v = frame.vector(i).to_vec();
        let len2 = dot(&v, &v);
        prop_assume!(len2 < 1.0 - 1e-6);
        let rest = frame_edit(&frame, &FrameEdit::RemoveIndex(i), &tol).unwrap();
        let (_, tight) = whiten(&rest, &tol).unwrap();
        // (I − vvᵀ)^{-1/2} = I + (1/√(1−|v|²) − 1) v̂v̂ᵀ
        let stretch = 1.0 / (1.0 - len2).sqrt() - 1.0;
        for (j, w) in rest.vectors().enumerate() {
            let c = stretch * dot(w, &v) / len2;
            for (r, x) in w.iter().enumerate() {
                prop_assert!((tight.vector(j)[r] - (x + c * v[r])).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn subspace_round_trip_keeps_the_gram_matrix(seed in any::<u64>(), (n, k) in shape()) {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = random_tight_frame(&mut rng, n, k);
        let h = subspace_from_frame(&frame, &tol).unwrap();
        let back = frame_from_subspace(&h, &tol).unwrap();
        prop_assert!(frame.congruent(&back, 1e-12));
        // The Gram matrix of a tight frame is the projection onto H.
        prop_assert!((frame.gram() - h.projection()).amax() <= 1e-12);
    }

    #[test]
    fn cross_products_of_a_tight_frame_are_tight(seed in any::<u64>(), (n, k) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = random_tight_frame(&mut rng, n, k);
        let crosses = cross_product_frame(&frame, CROSS_PRODUCT_CAP).unwrap();
        let op = SymMatrix::sum_of_outer(k, crosses.iter().map(Vec::as_slice));
        prop_assert!(op.identity_deviation() <= 1e-10, "deviation {}", op.identity_deviation());
        // Each [v_L] is orthogonal to every v_i with i ∈ L.
        let c = &crosses[0];
        for i in 0..k - 1 {
            prop_assert!(dot(c, frame.vector(i)).abs() <= 1e-12);
        }
    }
}

#[test]
fn rank_deficient_vectors_are_not_a_frame() {
    let flat = Frame::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]);
    assert!(flat.is_err());
}
