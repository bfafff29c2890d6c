import logging
import os
import sys
from pathlib import Path

from flask import Flask, jsonify, request
from flask_cors import CORS

# Add src to Python path
ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT_DIR)

from analysis.export import reports_document
from analysis.fleet import FleetModel, fleet_report
from analysis.sweep import fold, row_means, run_sweep
from cluster.simulation import run
from errors import ScenarioParseError
from mitigation.strategies import STRATEGY_ORDER, RecoveryStrategy
from scenario.corpus import CORPUS_DIR, corpus_names, corpus_path, load_scenario
from scenario.parser import parse_scenario

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

SCENARIO_DIR = Path(os.environ.get("CORPUS_DIR", CORPUS_DIR))
MAX_SEEDS = 50


class BadRequest(Exception):
    def __init__(self, message, status=400, **extra):
        super().__init__(message)
        self.status = status
        self.extra = extra


@app.errorhandler(BadRequest)
def bad_request(e):
    logger.warning("Rejected %s %s (%d): %s", request.method, request.path, e.status, e)
    return jsonify({"error": str(e), **e.extra}), e.status


@app.errorhandler(ScenarioParseError)
def parse_error(e):
    logger.warning("Rejected %s %s: %d diagnostic(s)", request.method, request.path, len(e.diagnostics))
    return jsonify({"error": "scenario does not parse",
                    "diagnostics": [str(d) for d in e.diagnostics]}), 400


def _scenario(data):
    """A scenario from {"text": ...} or {"scenario": <corpus name>}."""
    if data.get("text"):
        return parse_scenario(data["text"])
    name = data.get("scenario")
    if not name:
        raise BadRequest("No scenario provided")
    try:
        return load_scenario(corpus_path(name, SCENARIO_DIR))
    except FileNotFoundError:
        raise BadRequest(f"Unknown scenario '{name}'", status=404) from None


def _strategy(value):
    try:
        return RecoveryStrategy.parse(value) if value else None
    except ValueError:
        raise BadRequest(f"Unknown strategy '{value}'") from None


def _int(value, name):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise BadRequest(f"'{name}' must be an integer") from None


# ======== API ROUTES ========
@app.route("/")
def home():
    return jsonify({"status": "ok", "message": "Failure Mitigation Simulator API"})


@app.route("/api/scenarios", methods=["GET"])
def get_scenarios():
    return jsonify({"scenarios": corpus_names(SCENARIO_DIR)})


@app.route("/api/run", methods=["POST"])
def run_scenario():
    data = request.get_json(silent=True) or {}
    spec = _scenario(data)
    seed = _int(data.get("seed", 1), "seed")
    strategy = _strategy(data.get("strategy"))
    try:
        result = run(spec, seed, strategy)
    except ValueError as e:
        raise BadRequest(str(e)) from None
    return jsonify(reports_document(result))


@app.route("/api/sweep", methods=["POST"])
def sweep():
    data = request.get_json(silent=True) or {}
    spec = _scenario(data)
    strategies = [_strategy(s) for s in data.get("strategies") or []] or list(STRATEGY_ORDER)
    seeds = [_int(s, "seeds") for s in data.get("seeds") or [1]]
    if len(seeds) > MAX_SEEDS:
        raise BadRequest(f"At most {MAX_SEEDS} seeds per request")
    rows = fold(run_sweep(spec, strategies, seeds))
    return jsonify({"scenario": spec.name, "seeds": seeds, "rows": [row_means(r) for r in rows]})


@app.route("/api/fleet", methods=["GET"])
def fleet():
    args = request.args
    try:
        model = FleetModel(
            fleet_size=int(args.get("robots", 1000)),
            failure_rate=float(args.get("rate_per_hour", 1.0)),
            interval_s=float(args.get("interval_s", 30.0)),
            window_s=float(args.get("window_s", 6.0)),
            fallbacks=int(args.get("fallbacks", 4)),
        )
        report = fleet_report(model, trials=int(args.get("trials", 100_000)), seed=int(args.get("seed", 0)))
    except ValueError as e:
        raise BadRequest(str(e)) from None
    report["placement_count"] = str(report["placement_count"])
    return jsonify(report)


if __name__ == "__main__":
    port = int(os.environ.get("PORT", 5000))
    app.run(host="0.0.0.0", port=port)
