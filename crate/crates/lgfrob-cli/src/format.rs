//! Plain text rendering of matrices and polynomials.

use lgfrob::poly::Exp;
use lgfrob::rational::fmt_q;
use lgfrob::{Mat, Poly, Q};

fn grid(cells: Vec<Vec<String>>) -> String {
    let width = cells.iter().flatten().map(|c| c.len()).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&format!("  [ {} ]\n", padded.join("  ")));
    }
    out
}

pub fn poly_mat(name: &str, m: &Mat<Poly>, names: &[String]) -> String {
    let cells = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).fmt_with(names)).collect())
        .collect();
    format!("{name} =\n{}", grid(cells))
}

pub fn q_mat(name: &str, m: &Mat<Q>) -> String {
    let cells = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| fmt_q(m.get(i, j))).collect())
        .collect();
    format!("{name} =\n{}", grid(cells))
}

pub fn q_list(xs: &[Q]) -> String {
    xs.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
}

pub fn monomial(e: &Exp) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != 0)
        .map(|(i, &k)| {
            if k == 1 {
                format!("u{}", i + 1)
            } else {
                format!("u{}^{k}", i + 1)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}
