use crate::evaluation::ReportRow;

/// Ordered evaluation rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        Self { rows }
    }

    /// Aligned plain-text table: Series, Mode, EER, k, q, accuracy, FAR, FRR
    /// and the attempt counts behind them.
    pub fn to_text(&self) -> String {
        let header = [
            "Series", "Mode", "EER", "k", "q", "accuracy", "FAR", "FRR", "genuine", "impostor",
        ];
        let rows: Vec<[String; 10]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.series.clone(),
                    r.mode.label().to_string(),
                    format!("{:.4}", r.eer),
                    r.k.to_string(),
                    r.q.to_string(),
                    format!("{:.4}", r.accuracy),
                    format!("{:.4}", r.far),
                    format!("{:.4}", r.frr),
                    r.counts.genuine().to_string(),
                    r.counts.impostor().to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, &w))| {
                    if i < 2 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(header.to_vec());
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for r in &rows {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        out
    }
}
