//! AMI checked against an independent computation of the expected mutual
//! information: exact integer binomials for the hypergeometric weights
//! instead of log-factorial tables, and for tiny inputs an average over every
//! permutation of one labeling.

use dqlab::models::{adjusted_mutual_information, expected_mutual_information, mutual_information};

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

fn emi_oracle(rows: &[usize], cols: &[usize]) -> f64 {
    let n: usize = rows.iter().sum();
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in rows {
        for &b in cols {
            let total = binom(n, b) as f64;
            for nij in 1..=a.min(b) {
                let ways = binom(a, nij) * binom(n - a, b - nij);
                if ways == 0 {
                    continue;
                }
                let p = ways as f64 / total;
                let x = nij as f64;
                emi += p * x / nf * (nf * x / (a * b) as f64).ln();
            }
        }
    }
    emi
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

fn mi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint = [[0usize; 3]; 3];
    let (mut ra, mut rb) = ([0usize; 3], [0usize; 3]);
    for (&x, &y) in a.iter().zip(b) {
        joint[x][y] += 1;
        ra[x] += 1;
        rb[y] += 1;
    }
    let mut mi = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let c = joint[i][j] as f64;
            if c > 0.0 {
                mi += c / n * (n * c / (ra[i] * rb[j]) as f64).ln();
            }
        }
    }
    mi
}

fn ami_oracle(a: &[usize], b: &[usize]) -> f64 {
    let count = |l: &[usize]| {
        let mut c = vec![0usize; l.iter().max().map_or(0, |m| m + 1)];
        l.iter().for_each(|&x| c[x] += 1);
        c.retain(|&x| x > 0);
        c
    };
    let (ra, rb) = (count(a), count(b));
    let mi = mi_oracle(a, b);
    let emi = emi_oracle(&ra, &rb);
    let norm = (entropy(&ra) + entropy(&rb)) / 2.0;
    (mi - emi) / (norm - emi)
}

/// Every contingency table with at most 3 rows and 3 columns summing to `n`.
/// Up to relabelling and reordering of items these are exactly the pairs of
/// partitions of `n` items into at most 3 blocks each.
fn tables(n: usize) -> Vec<[usize; 9]> {
    fn go(n: usize, cell: usize, acc: &mut [usize; 9], out: &mut Vec<[usize; 9]>) {
        if cell == 8 {
            acc[8] = n;
            out.push(*acc);
            return;
        }
        for v in 0..=n {
            acc[cell] = v;
            go(n - v, cell + 1, acc, out);
        }
    }
    let mut out = Vec::new();
    go(n, 0, &mut [0; 9], &mut out);
    out
}

fn labelings(t: &[usize; 9]) -> (Vec<usize>, Vec<usize>) {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (cell, &c) in t.iter().enumerate() {
        for _ in 0..c {
            a.push(cell / 3);
            b.push(cell % 3);
        }
    }
    (a, b)
}

fn is_degenerate(a: &[usize], b: &[usize]) -> bool {
    let blocks = |l: &[usize]| {
        let mut v = l.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    // both single-block, or both all-singletons: the adjusted score is 0/0
    (blocks(a) == 1 && blocks(b) == 1) || (blocks(a) == a.len() && blocks(b) == b.len())
}

#[test]
fn emi_matches_exact_binomial_oracle_for_all_small_marginals() {
    for n in 1..=12 {
        for t in tables(n) {
            let rows: Vec<usize> = (0..3)
                .map(|i| t[3 * i] + t[3 * i + 1] + t[3 * i + 2])
                .filter(|&x| x > 0)
                .collect();
            let cols: Vec<usize> = (0..3).map(|j| t[j] + t[3 + j] + t[6 + j]).filter(|&x| x > 0).collect();
            let got = expected_mutual_information(&rows, &cols);
            let want = emi_oracle(&rows, &cols);
            assert!(
                (got - want).abs() <= 1e-9,
                "n={n} rows={rows:?} cols={cols:?}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn ami_matches_oracle_on_every_partition_pair_up_to_twelve_items() {
    let mut checked = 0usize;
    for n in 1..=12 {
        for t in tables(n) {
            let (a, b) = labelings(&t);
            let got = adjusted_mutual_information(&a, &b).unwrap();
            let identical = {
                let mut pairs: Vec<(usize, usize)> = a.iter().copied().zip(b.iter().copied()).collect();
                pairs.sort_unstable();
                pairs.dedup();
                let distinct = |l: &[usize]| {
                    let mut v = l.to_vec();
                    v.sort_unstable();
                    v.dedup();
                    v.len()
                };
                pairs.len() == distinct(&a) && pairs.len() == distinct(&b)
            };
            if identical {
                assert_eq!(got, 1.0, "{t:?}");
                continue;
            }
            if is_degenerate(&a, &b) {
                continue;
            }
            let want = ami_oracle(&a, &b);
            assert!((got - want).abs() <= 1e-9, "table {t:?}: {got} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 100_000, "only {checked} tables checked");
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        out(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

#[test]
fn emi_equals_average_mi_over_all_permutations() {
    let cases: [(&[usize], &[usize]); 3] = [
        (&[0, 0, 1, 1, 2, 2, 2], &[0, 1, 1, 0, 0, 1, 2]),
        (&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]),
        (&[0, 1, 1, 1, 1, 2, 2, 2], &[0, 0, 0, 1, 1, 1, 1, 1]),
    ];
    for (a, b) in cases {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut idx: Vec<usize> = (0..b.len()).collect();
        permutations(&mut idx, 0, &mut |p| {
            let shuffled: Vec<usize> = p.iter().map(|&i| b[i]).collect();
            sum += mutual_information(a, &shuffled).unwrap();
            count += 1;
        });
        let count_of = |l: &[usize]| {
            let mut c = vec![0usize; 3];
            l.iter().for_each(|&x| c[x] += 1);
            c.retain(|&x| x > 0);
            c
        };
        let emi = expected_mutual_information(&count_of(a), &count_of(b));
        assert!(
            (emi - sum / count as f64).abs() < 1e-12,
            "{emi} vs {}",
            sum / count as f64
        );
    }
}
