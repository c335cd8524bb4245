from typing import TypedDict, List, Dict, Any, Optional


class StageStatus(TypedDict, total=False):
    done: bool
    failed: bool
    seconds: float
    error: Optional[str]


class PipelineState(TypedDict, total=False):
    run_id: Optional[str]                       # run directory name, also tags log lines
    run_dir: Optional[str]
    seed: int
    tickers: List[str]                          # universe after filtering
    dropped_tickers: Dict[str, List[str]]       # reason -> tickers
    graph_names: List[str]
    baseline: Optional[str]                     # RNN / MGRN-Sector / ... label of the graph set
    dataset: Dict[str, Dict[str, Any]]          # split -> {days, data_points, news_count, zero_vector_rate, skip_count}
    metrics: Dict[str, Any]                     # acc_q, attention, backtest summaries
    outputs: Dict[str, str]                     # artifact name -> file name in the run directory
    status_tracking: Dict[str, StageStatus]     # stage -> status
    next_stage: Optional[str]


def initial_state(seed: int, stages: List[str]) -> PipelineState:
    return PipelineState(
        run_id=None,
        run_dir=None,
        seed=seed,
        tickers=[],
        dropped_tickers={},
        graph_names=[],
        baseline=None,
        dataset={},
        metrics={},
        outputs={},
        status_tracking={s: StageStatus(done=False, failed=False, seconds=0.0, error=None) for s in stages},
        next_stage=stages[0] if stages else None,
    )
