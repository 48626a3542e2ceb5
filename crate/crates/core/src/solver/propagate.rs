//! Bound propagation on rows of binary variables, with an undo trail.

use crate::ilp::{IlpModel, Relation};

pub(crate) const UNFIXED: i8 = -1;

#[derive(Debug, Clone)]
struct PRow {
    terms: Vec<(usize, i64)>,
    lo: i64,
    hi: i64,
    min_act: i64,
    max_act: i64,
    max_abs: i64,
}

/// Row activities are kept as `[min_act, max_act]` over all completions of
/// the current partial assignment.
#[derive(Debug, Clone)]
pub(crate) struct Propagator {
    rows: Vec<PRow>,
    var_rows: Vec<Vec<(usize, i64)>>,
    value: Vec<i8>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    queued: Vec<bool>,
    objective_row: Option<usize>,
    stage_of: Vec<u32>,
    unfixed_in_stage: Vec<usize>,
}

impl Propagator {
    pub fn new(model: &IlpModel) -> Self {
        let mut p = Propagator {
            rows: Vec::with_capacity(model.rows.len() + 1),
            var_rows: vec![Vec::new(); model.variables.len()],
            value: vec![UNFIXED; model.variables.len()],
            trail: Vec::new(),
            queue: Vec::new(),
            queued: Vec::new(),
            objective_row: None,
            stage_of: Vec::new(),
            unfixed_in_stage: Vec::new(),
        };
        let mut stage = 0;
        for v in 0..model.variables.len() {
            while stage < model.stages.len() && model.stages[stage] <= v {
                stage += 1;
            }
            p.stage_of.push(stage as u32);
        }
        p.unfixed_in_stage = vec![0; model.stages.len() + 1];
        for &st in &p.stage_of {
            p.unfixed_in_stage[st as usize] += 1;
        }
        for row in &model.rows {
            let (lo, hi) = match row.relation {
                Relation::Le => (i64::MIN, row.rhs),
                Relation::Eq => (row.rhs, row.rhs),
                Relation::Ge => (row.rhs, i64::MAX),
            };
            p.push_row(row.terms.clone(), lo, hi);
        }
        if !model.objective.is_empty() {
            p.objective_row = Some(p.push_row(model.objective.clone(), i64::MIN, i64::MAX));
        }
        p.queued = vec![false; p.rows.len()];
        p
    }

    fn push_row(&mut self, terms: Vec<(usize, i64)>, lo: i64, hi: i64) -> usize {
        let id = self.rows.len();
        let min_act = terms.iter().map(|&(_, c)| c.min(0)).sum();
        let max_act = terms.iter().map(|&(_, c)| c.max(0)).sum();
        let max_abs = terms.iter().map(|&(_, c)| c.abs()).max().unwrap_or(0);
        for &(v, c) in &terms {
            self.var_rows[v].push((id, c));
        }
        self.rows.push(PRow { terms, lo, hi, min_act, max_act, max_abs });
        id
    }

    pub fn value(&self, var: usize) -> i8 {
        self.value[var]
    }

    pub fn values(&self) -> &[i8] {
        &self.value
    }

    pub fn trail(&self) -> &[usize] {
        &self.trail
    }

    pub fn trail_len(&self) -> usize {
        self.trail.len()
    }

    /// Number of leading stages whose variables are all fixed.
    pub fn completed_stages(&self) -> usize {
        self.unfixed_in_stage.iter().take_while(|&&c| c == 0).count()
    }

    /// Requires the objective to lie in `[lo, hi]`.
    pub fn set_objective_bounds(&mut self, lo: i64, hi: i64) {
        if let Some(r) = self.objective_row {
            self.rows[r].lo = lo;
            self.rows[r].hi = hi;
            self.enqueue(r);
        }
    }

    /// Queues the objective row for re-checking. Bound changes are otherwise
    /// only seen when one of its variables moves.
    pub fn touch_objective(&mut self) {
        if let Some(r) = self.objective_row {
            self.enqueue(r);
        }
    }

    fn enqueue(&mut self, r: usize) {
        if !self.queued[r] {
            self.queued[r] = true;
            self.queue.push(r);
        }
    }

    fn assign(&mut self, var: usize, val: bool) {
        self.value[var] = i8::from(val);
        self.trail.push(var);
        self.unfixed_in_stage[self.stage_of[var] as usize] -= 1;
        for k in 0..self.var_rows[var].len() {
            let (r, c) = self.var_rows[var][k];
            let row = &mut self.rows[r];
            match (c > 0, val) {
                (true, true) => row.min_act += c,
                (true, false) => row.max_act -= c,
                (false, true) => row.max_act += c,
                (false, false) => row.min_act -= c,
            }
            self.enqueue(r);
        }
    }

    /// Fixes `var` and propagates. Returns false on conflict; the caller must
    /// then undo to an earlier trail mark.
    pub fn fix(&mut self, var: usize, val: bool) -> bool {
        match self.value[var] {
            UNFIXED => {
                self.assign(var, val);
                self.propagate()
            }
            v => {
                if (v == 1) != val {
                    self.clear_queue();
                    return false;
                }
                self.propagate()
            }
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.queued[r] = false;
        }
    }

    pub fn enqueue_all_and_propagate(&mut self) -> bool {
        for r in 0..self.rows.len() {
            self.enqueue(r);
        }
        self.propagate()
    }

    pub fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            self.queued[r] = false;
            let (lo, hi, min_act, max_act, max_abs) = {
                let row = &self.rows[r];
                (row.lo, row.hi, row.min_act, row.max_act, row.max_abs)
            };
            if min_act > hi || max_act < lo {
                self.clear_queue();
                return false;
            }
            let tight_hi = hi != i64::MAX && min_act + max_abs > hi;
            let tight_lo = lo != i64::MIN && max_act - max_abs < lo;
            if !tight_hi && !tight_lo {
                continue;
            }
            for k in 0..self.rows[r].terms.len() {
                let (v, c) = self.rows[r].terms[k];
                if self.value[v] != UNFIXED {
                    continue;
                }
                let (min_act, max_act) = (self.rows[r].min_act, self.rows[r].max_act);
                let a = c.abs();
                // Setting v against its coefficient's sign moves min up or max down by |c|.
                let breaks_hi = hi != i64::MAX && min_act + a > hi;
                let breaks_lo = lo != i64::MIN && max_act - a < lo;
                if breaks_hi && breaks_lo {
                    self.clear_queue();
                    return false;
                }
                if breaks_hi {
                    self.assign(v, c < 0);
                } else if breaks_lo {
                    self.assign(v, c > 0);
                }
            }
        }
        true
    }

    pub fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            let val = self.value[var] == 1;
            for &(r, c) in &self.var_rows[var] {
                let row = &mut self.rows[r];
                match (c > 0, val) {
                    (true, true) => row.min_act -= c,
                    (true, false) => row.max_act += c,
                    (false, true) => row.max_act -= c,
                    (false, false) => row.min_act += c,
                }
            }
            self.value[var] = UNFIXED;
            self.unfixed_in_stage[self.stage_of[var] as usize] += 1;
        }
        self.clear_queue();
    }
}
