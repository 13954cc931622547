use proptest::prelude::*;
use seqopt::pareto::nondominated_sort_with_crowding;
use seqopt::{extract_nondominated, DesignVector, ObjectiveVector};

fn brute_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3).prop_flat_map(move |m| {
        // Small integer grid so ties and duplicates are common.
        prop::collection::vec(prop::collection::vec((0u8..8).prop_map(f64::from), m), 0..max_n)
    })
}

fn entries(pts: &[Vec<f64>]) -> Vec<(DesignVector, ObjectiveVector)> {
    pts.iter()
        .enumerate()
        .map(|(i, p)| (DesignVector::new(vec![i as u16]), ObjectiveVector::new(p.clone())))
        .collect()
}

proptest! {
    #[test]
    fn extraction_matches_brute_force(pts in points(120)) {
        let set = extract_nondominated(entries(&pts));
        let expected: Vec<u16> = (0..pts.len())
            .filter(|&i| !pts.iter().any(|q| brute_dominates(q, &pts[i])))
            .map(|i| i as u16)
            .collect();
        let got: Vec<u16> = set.vectors().map(|v| v.indices()[0]).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn extraction_is_idempotent(pts in points(80)) {
        let once = extract_nondominated(entries(&pts));
        let twice = extract_nondominated(once.entries().to_vec());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn union_front_comes_from_part_fronts(a in points(60), b in points(60)) {
        prop_assume!(a.first().map(Vec::len) == b.first().map(Vec::len) || a.is_empty() || b.is_empty());
        let ea = entries(&a);
        let eb: Vec<_> = entries(&b)
            .into_iter()
            .map(|(v, f)| (DesignVector::new(vec![v.indices()[0] + 1000]), f))
            .collect();
        let fa = extract_nondominated(ea.clone());
        let fb = extract_nondominated(eb.clone());
        let whole = extract_nondominated(ea.into_iter().chain(eb));
        let merged = extract_nondominated(fa.into_entries().into_iter().chain(fb.into_entries()));
        prop_assert_eq!(whole, merged);
    }

    #[test]
    fn fronts_match_repeated_peeling(pts in points(60)) {
        let objs: Vec<ObjectiveVector> = pts.iter().cloned().map(ObjectiveVector::new).collect();
        let ranked = nondominated_sort_with_crowding(&objs);
        let mut left: Vec<usize> = (0..pts.len()).collect();
        let mut peeled = Vec::new();
        while !left.is_empty() {
            let front: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| !left.iter().any(|&j| brute_dominates(&pts[j], &pts[i])))
                .collect();
            left.retain(|i| !front.contains(i));
            peeled.push(front);
        }
        let mut got = ranked.fronts.clone();
        for f in &mut got {
            f.sort_unstable();
        }
        prop_assert_eq!(got, peeled);
        for (r, front) in ranked.fronts.iter().enumerate() {
            for &i in front {
                prop_assert_eq!(ranked.rank[i], r);
                prop_assert!(ranked.crowding[i] >= 0.0);
            }
        }
    }
}
