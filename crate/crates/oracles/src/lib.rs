//! Straightforward solvers working on raw prompt text.
//!
//! These share no code with the generators, the rollout or the statistics
//! in the main crates. They exist to be compared against them in tests.

use num_bigint::BigUint;

fn lsb_number(digits: &str) -> BigUint {
    let msb: String = digits.chars().rev().collect();
    msb.parse().expect("decimal digits")
}

fn lsb_text(n: &BigUint) -> String {
    n.to_string().chars().rev().collect()
}

pub fn reversal(prompt: &str) -> String {
    let body = prompt.strip_suffix('=').expect("reversal prompt ends with =");
    body.chars().rev().collect()
}

/// Column sum of LSB-first operands; the answer is as wide as the widest
/// operand, plus one digit for a non-zero final carry.
pub fn addition(prompt: &str) -> String {
    let body = prompt.strip_suffix('=').expect("addition prompt ends with =");
    let operands: Vec<&str> = body.split('+').collect();
    let width = operands.iter().map(|o| o.len()).max().unwrap();
    let sum: BigUint = operands.iter().map(|o| lsb_number(o)).sum();
    let mut out = lsb_text(&sum);
    while out.len() < width {
        out.push('0');
    }
    out
}

/// Partial products, one per multiplier digit, each shifted and padded to
/// the width of the product, then the product.
pub fn multiplication(prompt: &str) -> String {
    let body = prompt.strip_suffix('=').expect("multiplication prompt ends with =");
    let (a, b) = body.split_once('*').expect("two factors");
    let a = lsb_number(a);
    let product = &a * lsb_number(b);
    let width = product.to_string().len();
    let rows: Vec<String> = b
        .chars()
        .enumerate()
        .map(|(j, d)| {
            let digit = BigUint::from(d.to_digit(10).expect("digit"));
            let row = &a * digit * BigUint::from(10u32).pow(j as u32);
            let mut text = lsb_text(&row);
            if row == BigUint::from(0u32) {
                text.clear();
            }
            while text.len() < width {
                text.push('0');
            }
            text
        })
        .collect();
    format!("{}={}", rows.join("+"), lsb_text(&product))
}

/// Runs `op reg arg` triples on one-bit registers and answers the trailing
/// two-character read.
pub fn fflm(prompt: &str) -> String {
    let chars: Vec<char> = prompt.chars().collect();
    let (body, query) = chars.split_at(chars.len() - 2);
    assert_eq!(query[0], 'r');
    let mut regs: std::collections::HashMap<char, bool> = Default::default();
    for cmd in body.chunks(3) {
        match cmd[0] {
            'w' => {
                regs.insert(cmd[1], cmd[2] == '1');
            }
            'f' => {
                if let Some(v) = regs.get_mut(&cmd[1]) {
                    *v = !*v;
                }
            }
            'r' | 'i' => {}
            other => panic!("unknown command {other}"),
        }
    }
    if regs[&query[1]] { "1" } else { "0" }.to_string()
}

/// Letter keys with digit values, then the string to translate.
pub fn value_assignment(prompt: &str) -> String {
    let chars: Vec<char> = prompt.chars().collect();
    let mut table = std::collections::HashMap::new();
    let mut pos = 0;
    while pos + 1 < chars.len() && chars[pos + 1].is_ascii_digit() {
        table.insert(chars[pos], chars[pos + 1]);
        pos += 2;
    }
    chars[pos..].iter().map(|c| table[c]).collect()
}

/// Counts up from the prompt until `len` characters have been written.
pub fn successor(prompt: &str, len: usize) -> String {
    let mut n: BigUint = prompt.parse().expect("start number");
    let mut out = String::new();
    while out.len() < len {
        n += 1u32;
        out.push_str(&n.to_string());
    }
    assert_eq!(out.len(), len, "length does not end on a number");
    out
}

/// `c[q][k] = sum_j a[q][j] * b[j][k]` by the triple loop.
pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; b[0].len()]; n];
    for q in 0..n {
        for k in 0..b[0].len() {
            for j in 0..b.len() {
                c[q][k] += a[q][j] * b[j][k];
            }
        }
    }
    c
}

/// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let front = (ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()).exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Welch's t, Welch-Satterthwaite degrees of freedom and the two-tailed p.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    fn moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (n, mean, var)
    }
    let (na, ma, va) = moments(a);
    let (nb, mb, vb) = moments(b);
    let se = (va / na + vb / nb).sqrt();
    let t = (ma - mb) / se;
    let num = (va / na + vb / nb).powi(2);
    let den = (va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0);
    let df = num / den;
    let p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    (t, df, p)
}
