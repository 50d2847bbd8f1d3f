import logging
from flask import Blueprint, jsonify, current_app
from extensions import db
from models import ExperimentRun, CaseReportRecord
from services.experiment_runner import package_versions
from services.spectral_core import FFT_WORKERS
from sqlalchemy import func

logger = logging.getLogger(__name__)

status_bp = Blueprint('status', __name__)

@status_bp.route('/api/stats')
def api_stats():
    """Run and verdict statistics"""
    try:
        total_runs = ExperimentRun.query.count()
        completed_runs = ExperimentRun.query.filter_by(status='completed').count()
        failed_runs = ExperimentRun.query.filter_by(status='failed').count()
        processing_runs = ExperimentRun.query.filter_by(status='processing').count()

        verdict_stats = db.session.query(
            CaseReportRecord.verdict,
            func.count(CaseReportRecord.id)
        ).group_by(CaseReportRecord.verdict).all()

        suite_stats = db.session.query(
            ExperimentRun.suite,
            func.count(ExperimentRun.id)
        ).filter(ExperimentRun.suite.isnot(None)).group_by(ExperimentRun.suite).all()

        total_reports = CaseReportRecord.query.count()

        return jsonify({
            'runs': {
                'total': total_runs,
                'completed': completed_runs,
                'failed': failed_runs,
                'processing': processing_runs
            },
            'reports': {
                'total': total_reports,
                'average_per_run': round(total_reports / max(total_runs, 1), 2)
            },
            'verdicts': dict(verdict_stats),
            'suites': dict(suite_stats)
        })

    except Exception as e:
        logger.error(f"Stats error: {e}")
        return jsonify({'error': str(e)}), 500

@status_bp.route('/system/status')
def system_status():
    """Get system status"""
    try:
        return jsonify({
            'status': 'ok',
            'runs_root': current_app.config['RUNS_ROOT'],
            'fft_workers': FFT_WORKERS,
            'versions': package_versions(),
            'registered_runs': ExperimentRun.query.count()
        })
    except Exception as e:
        logger.error(f"Status check error: {e}")
        return jsonify({'error': str(e)}), 500
