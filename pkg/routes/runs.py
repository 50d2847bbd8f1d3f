import json
import logging
from flask import Blueprint, request, jsonify, current_app
from extensions import db
from models import ExperimentRun, CaseReportRecord
from services.persistence import RunStore
from sqlalchemy import func, case

logger = logging.getLogger(__name__)

runs_bp = Blueprint('runs', __name__)

def _passed_count():
    return func.sum(case((CaseReportRecord.verdict == 'pass', 1), else_=0))

@runs_bp.route('/api/runs')
def api_runs():
    """Paginated run registry, newest first"""
    try:
        page = request.args.get('page', 1, type=int)
        per_page = request.args.get('per_page', 10, type=int)
        status = request.args.get('status')

        # Limit per_page
        per_page = max(1, min(per_page, 100))

        runs_query = db.session.query(
            ExperimentRun,
            func.count(CaseReportRecord.id).label('report_count'),
            _passed_count().label('passed_count')
        ).outerjoin(CaseReportRecord).group_by(ExperimentRun.id)
        if status:
            runs_query = runs_query.filter(ExperimentRun.status == status)
        runs_query = runs_query.order_by(ExperimentRun.created_date.desc(), ExperimentRun.id.desc())

        runs_paginated = runs_query.paginate(
            page=page,
            per_page=per_page,
            error_out=False
        )

        runs_data = []
        for run, report_count, passed_count in runs_paginated.items:
            runs_data.append({
                'run_id': run.id,
                'experiment_id': run.experiment_id,
                'kind': run.kind,
                'suite': run.suite,
                'status': run.status,
                'created_date': run.created_date.isoformat(),
                'reports': report_count or 0,
                'passed': int(passed_count or 0),
                'run_dir': run.run_dir
            })

        return jsonify({
            'runs': runs_data,
            'pagination': {
                'current_page': page,
                'per_page': per_page,
                'total_runs': runs_paginated.total,
                'total_pages': runs_paginated.pages,
                'has_next': runs_paginated.has_next,
                'has_prev': runs_paginated.has_prev
            }
        })

    except Exception as e:
        logger.error(f"API runs error: {e}")
        return jsonify({'error': str(e)}), 500

@runs_bp.route('/api/runs/<int:run_id>')
def run_details(run_id):
    """Registry entry of one run with its case reports"""
    run = db.get_or_404(ExperimentRun, run_id)
    try:
        reports = CaseReportRecord.query.filter_by(run_id=run_id).order_by(CaseReportRecord.id).all()
        return jsonify({
            'run_id': run.id,
            'experiment_id': run.experiment_id,
            'kind': run.kind,
            'suite': run.suite,
            'status': run.status,
            'error_message': run.error_message,
            'elapsed_seconds': run.elapsed_seconds,
            'created_date': run.created_date.isoformat(),
            'config': run.config,
            'run_dir': run.run_dir,
            'reports': [{
                'criterion': report.criterion,
                'verdict': report.verdict,
                'measured': json.loads(report.measured_json),
                'provenance': report.provenance
            } for report in reports]
        })

    except Exception as e:
        logger.error(f"Run details error: {e}")
        return jsonify({'error': str(e)}), 500

@runs_bp.route('/api/runs/<int:run_id>/report')
def run_report(run_id):
    """report.json as written in the run directory"""
    run = db.get_or_404(ExperimentRun, run_id)
    try:
        store = RunStore(current_app.config['RUNS_ROOT'])
        return jsonify(store.load_report(run.run_dir))
    except FileNotFoundError:
        return jsonify({'error': f'No report written for run {run_id}'}), 404
    except Exception as e:
        logger.error(f"Run report error: {e}")
        return jsonify({'error': str(e)}), 500
