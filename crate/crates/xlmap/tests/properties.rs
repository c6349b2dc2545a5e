//! Property tests over the numeric kernel and the file formats.

use proptest::prelude::*;

use xlmap::align::AlignmentLink;
use xlmap::dict::build_contextual_dictionary;
use xlmap::io::{
    load_token_embeddings, load_word_vectors, save_token_embeddings, save_word_vectors,
    EmbeddingTable, TokenEmbeddingCorpus, TokenEntry,
};
use xlmap::matrix::DenseMatrix;
use xlmap::sentence::{embed_static, sif_weights};
use xlmap::svd::thin_svd;
use xlmap::solve_procrustes;

fn finite_f64() -> impl Strategy<Value = f64> {
    // Exercise a wide dynamic range without overflowing norms.
    prop_oneof![
        -1e6..1e6f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(1.5e-300),
    ]
}

fn square_matrix(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_dim).prop_flat_map(|d| {
        proptest::collection::vec(-10.0..10.0f64, d * d)
            .prop_map(move |data| DenseMatrix::from_vec(d, d, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs_and_is_orthonormal(m in square_matrix(10)) {
        let svd = thin_svd(&m).unwrap();
        prop_assert!(svd.u.orthogonality_residual() <= 1e-8);
        prop_assert!(svd.vt.transpose().orthogonality_residual() <= 1e-8);
        for w in svd.singular_values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let err = svd.reconstruct().max_abs_diff(&m);
        prop_assert!(err <= 1e-8 * 1.0f64.max(m.max_abs()));
    }

    #[test]
    fn procrustes_output_is_orthogonal_isometry(
        d in 2usize..8,
        n in 1usize..20,
        seed in any::<u64>(),
    ) {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d * n).map(|_| rng.gen_range(-3.0..3.0)).collect()
        };
        let x = DenseMatrix::from_vec(d, n, data(&mut rng)).unwrap();
        let y = DenseMatrix::from_vec(d, n, data(&mut rng)).unwrap();
        let map = solve_procrustes(&x, &y).unwrap();
        prop_assert!(map.matrix().orthogonality_residual() <= 1e-10);
        // Applying the map preserves column norms.
        let mapped = map.apply(&x).unwrap();
        for j in 0..n {
            prop_assert!((mapped.column_norm(j) - x.column_norm(j)).abs() <= 1e-8);
        }
    }

    #[test]
    fn word_vector_format_round_trips(
        vectors in proptest::collection::vec(
            proptest::collection::vec(finite_f64(), 3),
            1..40,
        )
    ) {
        let mut table = EmbeddingTable::new(3, "prop");
        for (i, v) in vectors.iter().enumerate() {
            table.push(format!("t{i}"), v.clone()).unwrap();
        }
        let mut buf = Vec::new();
        save_word_vectors(&table, &mut buf).unwrap();
        let (loaded, dups) = load_word_vectors(buf.as_slice(), "prop").unwrap();
        prop_assert_eq!(dups, 0);
        prop_assert_eq!(loaded.len(), table.len());
        for i in 0..table.len() {
            prop_assert_eq!(loaded.token(i), table.token(i));
            // Bit-exact: compare raw representations so -0.0 stays -0.0.
            let a: Vec<u64> = loaded.vector(i).iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = table.vector(i).iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn token_dump_format_round_trips(
        sentences in proptest::collection::vec(
            proptest::collection::vec(proptest::collection::vec(finite_f64(), 2), 0..5),
            1..20,
        )
    ) {
        let sents: Vec<Vec<TokenEntry>> = sentences
            .iter()
            .enumerate()
            .map(|(s, toks)| {
                toks.iter()
                    .enumerate()
                    .map(|(t, v)| TokenEntry {
                        token: format!("s{s}t{t}"),
                        vector: v.clone(),
                    })
                    .collect()
            })
            .collect();
        let corpus = TokenEmbeddingCorpus::new(2, "prop", sents);
        let mut buf = Vec::new();
        save_token_embeddings(&corpus, &mut buf).unwrap();
        let loaded = load_token_embeddings(buf.as_slice(), "prop").unwrap();
        prop_assert_eq!(loaded.len(), corpus.len());
        for (a, b) in loaded.sentences().iter().zip(corpus.sentences()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn contextual_cap_is_a_prefix(
        raw_links in proptest::collection::vec((0usize..4, 0usize..5, 0usize..5), 0..40),
        cap in 1usize..20,
    ) {
        let vectors: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 + 1.0]).collect();
        let sentence: Vec<TokenEntry> = vectors
            .iter()
            .enumerate()
            .map(|(t, v)| TokenEntry { token: format!("t{t}"), vector: v.clone() })
            .collect();
        let corpus = TokenEmbeddingCorpus::new(1, "p", vec![sentence; 4]);
        let links: Vec<AlignmentLink> = raw_links
            .iter()
            .map(|&(s, i, j)| AlignmentLink {
                sentence_index: s,
                source_pos: i,
                target_pos: j,
            })
            .collect();
        let full = build_contextual_dictionary(&corpus, &corpus, &links, usize::MAX);
        let capped = build_contextual_dictionary(&corpus, &corpus, &links, cap);
        match (full, capped) {
            (Ok((_, all)), Ok((_, some))) => {
                let expected: Vec<_> = all.iter().take(cap).copied().collect();
                prop_assert_eq!(some, expected);
            }
            (Err(_), Err(_)) => {} // both empty after filtering
            other => prop_assert!(false, "cap changed the outcome: {:?}", other.1.is_ok()),
        }
    }

    #[test]
    fn embedding_is_permutation_invariant(
        perm_seed in any::<u64>(),
        lens in proptest::collection::vec(1usize..6, 3..8),
    ) {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        let mut table = EmbeddingTable::new(4, "p");
        let mut corpus = Vec::new();
        for (i, len) in lens.iter().enumerate() {
            let token = format!("w{i}");
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            table.push(token.clone(), v).unwrap();
            corpus.push(vec![token; *len]);
        }
        let freqs = xlmap::io::count_frequencies(&corpus).unwrap();
        let sif = sif_weights(&freqs, 1e-2).unwrap();
        let mut sentence: Vec<String> = (0..lens.len()).map(|i| format!("w{i}")).collect();
        let forward = embed_static(&sentence, &table, Some(&sif)).unwrap();
        sentence.shuffle(&mut rng);
        let shuffled = embed_static(&sentence, &table, Some(&sif)).unwrap();
        for (a, b) in forward.vector.iter().zip(&shuffled.vector) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
