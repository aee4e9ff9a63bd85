//! Precision-at-r over aggregated relevance judgments.
//!
//! `Rel(t, i)` is the share of respondents answering YES for result `i` of
//! target `t`; precision at `r` is the mean `Rel` over the first `r` ranks,
//! and runs are macro-averaged over targets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use log::warn;

use crate::error::{Error, Result};
use crate::webgraph::content_lines;

/// Survey question a judgment answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Question {
    Visit,
    Similar,
    Relevant,
}

impl FromStr for Question {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visit" => Ok(Question::Visit),
            "similar" => Ok(Question::Similar),
            "relevant" => Ok(Question::Relevant),
            other => Err(Error::invalid(format!("unknown question `{other}`"))),
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Question::Visit => "visit",
            Question::Similar => "similar",
            Question::Relevant => "relevant",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Judgment {
    pub yes: u32,
    pub total: u32,
}

impl Judgment {
    pub fn new(yes: u32, total: u32) -> Result<Self> {
        if total == 0 || yes > total {
            return Err(Error::invalid(format!("bad judgment {yes}/{total}")));
        }
        Ok(Judgment { yes, total })
    }

    pub fn rel(&self) -> f64 {
        self.yes as f64 / self.total as f64
    }
}

/// Judgments for one target page and one question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JudgmentSet {
    pub target: String,
    pub question: Question,
    pub results: BTreeMap<String, Judgment>,
}

impl JudgmentSet {
    pub fn new(target: &str, question: Question) -> Self {
        JudgmentSet {
            target: target.to_string(),
            question,
            results: BTreeMap::new(),
        }
    }
}

/// Every judgment set, keyed by target and question.
pub type Judgments = BTreeMap<(String, Question), JudgmentSet>;

/// One algorithm's ranked answer for one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedRun {
    pub target: String,
    pub algorithm: String,
    /// Result URLs, rank 1 first.
    pub results: Vec<String>,
}

impl RankedRun {
    pub fn new(target: &str, algorithm: &str, results: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = results.iter().find(|r| !seen.insert(r.as_str())) {
            return Err(Error::invalid(format!("result `{dup}` listed twice for `{target}`")));
        }
        Ok(RankedRun {
            target: target.to_string(),
            algorithm: algorithm.to_string(),
            results,
        })
    }
}

/// How to treat ranked results nobody judged.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MissingJudgment {
    /// Count as irrelevant and log a warning.
    #[default]
    Zero,
    Error,
}

/// `yes / total` for `result`.
pub fn rel(judgments: &JudgmentSet, result: &str) -> Result<f64> {
    judgments
        .results
        .get(result)
        .map(Judgment::rel)
        .ok_or_else(|| Error::invalid(format!("no judgment for `{result}` under `{}`", judgments.target)))
}

fn rel_or(judgments: &JudgmentSet, result: &str, missing: MissingJudgment) -> Result<f64> {
    match (rel(judgments, result), missing) {
        (Ok(r), _) => Ok(r),
        (Err(_), MissingJudgment::Zero) => {
            warn!(
                "no judgment for `{result}` under `{}`; counting it as 0",
                judgments.target
            );
            Ok(0.0)
        }
        (Err(e), MissingJudgment::Error) => Err(e),
    }
}

/// Mean relevance of the first `r` results of `run`.
pub fn precision_at_r(run: &RankedRun, judgments: &JudgmentSet, r: usize, missing: MissingJudgment) -> Result<f64> {
    if r == 0 || r > run.results.len() {
        return Err(Error::invalid(format!(
            "r = {r} outside 1..={} for `{}`",
            run.results.len(),
            run.target
        )));
    }
    let mut sum = 0.0;
    for result in &run.results[..r] {
        sum += rel_or(judgments, result, missing)?;
    }
    Ok(sum / r as f64)
}

/// Unweighted mean of precision at `r` over the runs' targets.
pub fn macro_precision(
    runs: &[RankedRun],
    judgments: &Judgments,
    question: Question,
    r: usize,
    missing: MissingJudgment,
) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::invalid("no runs to average"));
    }
    let mut sum = 0.0;
    for run in runs {
        let key = (run.target.clone(), question);
        let empty;
        let set = match judgments.get(&key) {
            Some(set) => set,
            None if missing == MissingJudgment::Zero => {
                empty = JudgmentSet::new(&run.target, question);
                &empty
            }
            None => {
                return Err(Error::invalid(format!(
                    "no `{question}` judgments for target `{}`",
                    run.target
                )))
            }
        };
        sum += precision_at_r(run, set, r, missing)?;
    }
    Ok(sum / runs.len() as f64)
}

/// Parses `target_url<TAB>result_url<TAB>question<TAB>yes<TAB>total`.
pub fn parse_judgments(text: &str, source_name: &str) -> Result<Judgments> {
    let mut out = Judgments::new();
    for (line_no, line) in content_lines(text) {
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [target, result, question, yes, total] = f[..] else {
            return Err(Error::parse(
                source_name,
                line_no,
                "expected `target<TAB>result<TAB>question<TAB>yes<TAB>total`",
            ));
        };
        if target.is_empty() || result.is_empty() {
            return Err(Error::parse(source_name, line_no, "empty url"));
        }
        let question: Question = question
            .parse()
            .map_err(|e: Error| Error::parse(source_name, line_no, e.to_string()))?;
        let count = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad count `{s}`")))
        };
        let judgment =
            Judgment::new(count(yes)?, count(total)?).map_err(|e| Error::parse(source_name, line_no, e.to_string()))?;
        let set = out
            .entry((target.to_string(), question))
            .or_insert_with(|| JudgmentSet::new(target, question));
        if set.results.insert(result.to_string(), judgment).is_some() {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("duplicate judgment for `{result}`"),
            ));
        }
    }
    Ok(out)
}

/// Parses `target_url<TAB>algorithm<TAB>rank<TAB>result_url`. Ranks of a
/// run must be exactly `1..=n`.
pub fn parse_runs(text: &str, source_name: &str) -> Result<Vec<RankedRun>> {
    let mut grouped: BTreeMap<(String, String), BTreeMap<usize, (String, usize)>> = BTreeMap::new();
    for (line_no, line) in content_lines(text) {
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [target, algorithm, rank, result] = f[..] else {
            return Err(Error::parse(
                source_name,
                line_no,
                "expected `target<TAB>algorithm<TAB>rank<TAB>result`",
            ));
        };
        if target.is_empty() || algorithm.is_empty() || result.is_empty() {
            return Err(Error::parse(source_name, line_no, "empty field"));
        }
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::parse(source_name, line_no, format!("bad rank `{rank}`")))?;
        let run = grouped.entry((target.to_string(), algorithm.to_string())).or_default();
        if run.insert(rank, (result.to_string(), line_no)).is_some() {
            return Err(Error::parse(source_name, line_no, format!("rank {rank} given twice")));
        }
    }
    let mut runs = Vec::with_capacity(grouped.len());
    for ((target, algorithm), ranks) in grouped {
        let mut results = Vec::with_capacity(ranks.len());
        for (expected, (rank, (url, line_no))) in ranks.into_iter().enumerate() {
            if rank != expected + 1 {
                return Err(Error::parse(
                    source_name,
                    line_no,
                    format!("rank {} is missing", expected + 1),
                ));
            }
            results.push(url);
        }
        runs.push(
            RankedRun::new(&target, &algorithm, results).map_err(|e| Error::parse(source_name, 0, e.to_string()))?,
        );
    }
    Ok(runs)
}

/// One row of the precision table.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionRow {
    pub algorithm: String,
    pub question: Question,
    pub r: usize,
    pub precision: f64,
}

/// Macro precision for every algorithm, every question present in the
/// judgments, and `r = 1..=r_max`, capped at the algorithm's shortest run.
pub fn precision_table(
    runs: &[RankedRun],
    judgments: &Judgments,
    r_max: usize,
    missing: MissingJudgment,
) -> Result<Vec<PrecisionRow>> {
    if runs.is_empty() {
        return Err(Error::invalid("no runs to evaluate"));
    }
    let questions: BTreeSet<Question> = judgments.keys().map(|(_, q)| *q).collect();
    let mut by_algorithm: BTreeMap<&str, Vec<RankedRun>> = BTreeMap::new();
    for run in runs {
        by_algorithm.entry(&run.algorithm).or_default().push(run.clone());
    }
    let mut rows = Vec::new();
    for (algorithm, runs) in by_algorithm {
        let shortest = runs.iter().map(|r| r.results.len()).min().unwrap_or(0);
        let top = r_max.min(shortest);
        if top < r_max {
            warn!("`{algorithm}` has a run of only {shortest} results; stopping at r = {top}");
        }
        for &question in &questions {
            for r in 1..=top {
                rows.push(PrecisionRow {
                    algorithm: algorithm.to_string(),
                    question,
                    r,
                    precision: macro_precision(&runs, judgments, question, r, missing)?,
                });
            }
        }
    }
    Ok(rows)
}

/// `algorithm<TAB>question<TAB>r<TAB>precision` lines.
pub fn table_to_text(rows: &[PrecisionRow]) -> String {
    rows.iter()
        .map(|row| {
            format!(
                "{}\t{}\t{}\t{}\n",
                row.algorithm,
                row.question,
                row.r,
                crate::format::sig(row.precision, 6)
            )
        })
        .collect()
}
