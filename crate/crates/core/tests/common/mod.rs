//! Shared oracles and fixtures for the integration suites.

/// Spearman correlation by explicit enumeration: list every ranking
/// consistent with the sorted order (permuting positions inside each tie
/// group), average the rank vectors over those assignments, and take the
/// Pearson correlation of the averaged ranks. Exponential in tie-group
/// size; intended for vectors of length <= 8.
pub fn brute_force_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rx = averaged_ranks(x);
    let ry = averaged_ranks(y);
    pearson(&rx, &ry)
}

fn averaged_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && values[idx] == values[order[pos - 1]] {
            groups.last_mut().unwrap().push(idx);
        } else {
            groups.push(vec![idx]);
        }
    }
    let mut avg = vec![0.0; n];
    let mut start = 0usize;
    for g in &groups {
        let perms = permutations(g);
        for &idx in g {
            let mut sum = 0.0;
            for perm in &perms {
                let offset = perm.iter().position(|&v| v == idx).unwrap();
                sum += (start + offset + 1) as f64;
            }
            avg[idx] = sum / perms.len() as f64;
        }
        start += g.len();
    }
    avg
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let rest: Vec<usize> = items.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, &v)| v).collect();
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
