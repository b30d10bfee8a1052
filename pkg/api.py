#!/usr/bin/env python3
"""
Attack Lab API

A Flask API service exposing attackability checks and attack campaigns in
JSON format.

Usage:
    flask run
    # or
    python api.py

Endpoints:
    GET  /api/health - Health check
    POST /api/check  - Attackability report of an instance (body: instance JSON)
    POST /api/run    - Run a campaign (body: ExperimentConfig JSON)
    GET  /api/runs   - List campaign summaries, newest first
"""
import os
import sys
import socket
import logging
from datetime import datetime
from flask import Flask, jsonify, request
from flask_cors import CORS

# Import common utilities for accessing project paths
sys.path.append(os.path.dirname(os.path.abspath(__file__)))
from src.attackability.certificate import attackability_index, project_parallel
from src.environment.instance_io import instance_from_dict
from src.harness.campaign import run_campaign
from src.harness.config import config_from_dict
from src.harness.outputs import list_run_summaries, write_campaign_outputs
from src.utils import settings
from src.utils.common import configure_logging, get_output_dir, load_json_file
from src.utils.errors import AttackLabError, ConfigError, InvalidEnvironment, ParseError

logger = logging.getLogger(__name__)

app = Flask(__name__)
# Enable CORS for all routes
CORS(app)

def find_available_port(start_port=settings.API_PORT, max_attempts=10):
    """Find an available port starting from start_port"""
    port = start_port
    for _ in range(max_attempts):
        with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as s:
            try:
                s.bind(('localhost', port))
                return port
            except OSError:
                port += 1
    raise RuntimeError(f"Could not find an available port after {max_attempts} attempts")

def error_response(error):
    """Maps a lab error to a JSON error body and status code."""
    if isinstance(error, (ConfigError, ParseError)):
        code = 400
    elif isinstance(error, InvalidEnvironment):
        code = 422
    else:
        code = 500
    logger.error(f"Request failed: {error}")
    return jsonify({"error": str(error)}), code

def _flag(value):
    return str(value).strip().lower() in ("1", "true", "yes")

@app.route('/api/health', methods=['GET'])
def api_health_check():
    """API endpoint for health check"""
    return jsonify({
        "status": "ok",
        "timestamp": datetime.now().isoformat()
    })

@app.route('/api/check', methods=['POST'])
def check():
    """API endpoint returning the attackability report of an instance"""
    data = request.get_json(silent=True)
    if data is None:
        return jsonify({"error": "Instance JSON body is required"}), 400
    try:
        env = instance_from_dict(data, allow_unnormalized=_flag(request.args.get("allow_unnormalized", "")))
        report = attackability_index(env, project_parallel(env, env.theta_star))
    except AttackLabError as e:
        return error_response(e)
    return jsonify(report.to_dict())

@app.route('/api/run', methods=['POST'])
def run():
    """API endpoint running a campaign and writing its files to the output directory"""
    data = request.get_json(silent=True)
    if data is None:
        return jsonify({"error": "Config JSON body is required"}), 400
    try:
        cfg = config_from_dict(data)
        results = run_campaign(cfg)
        paths = write_campaign_outputs(results, get_output_dir())
    except AttackLabError as e:
        return error_response(e)
    return jsonify({
        "config_hash": cfg.config_hash(),
        "summary_path": paths["summary"],
        "runs": [r.summary for r in results]
    })

@app.route('/api/runs', methods=['GET'])
def list_runs():
    """API endpoint to list existing campaign summaries"""
    result = []
    for path in list_run_summaries(get_output_dir()):
        try:
            runs = load_json_file(path)
        except ParseError as e:
            logger.warning(f"Skipping unreadable summary: {e}")
            continue
        result.append({
            "filename": os.path.basename(path),
            "filepath": path,
            "timestamp": datetime.fromtimestamp(os.path.getmtime(path)).isoformat(),
            "runs": len(runs)
        })
    return jsonify(result)

if __name__ == '__main__':
    configure_logging()
    try:
        port = find_available_port()
        print(f"Server starting on port {port}")
        app.run(debug=settings.API_DEBUG, port=port)
    except Exception as e:
        print(f"Error starting server: {e}")
