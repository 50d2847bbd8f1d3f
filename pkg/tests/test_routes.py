import json

import pytest

from extensions import db
from models import CaseReportRecord, ExperimentRun
from services.persistence import write_json


@pytest.fixture
def registry(app, tmp_path):
    """Three runs: a completed verify run with a report on disk, a failed solve and a run still processing."""
    run_dir = tmp_path / "runs" / "proj-abc"
    run_dir.mkdir(parents=True)
    write_json(run_dir / "report.json", [{"criterion": "projector_identities", "verdict": "pass"}])
    with app.app_context():
        verify = ExperimentRun(experiment_id="proj", kind="verify", suite="projectors",
                               run_dir=str(run_dir), config_json=json.dumps({"dim": 2}), status="completed")
        failed = ExperimentRun(experiment_id="blow", kind="solve", run_dir=str(tmp_path / "missing"),
                               config_json="{}", status="failed", error_message="energy grew")
        pending = ExperimentRun(experiment_id="slow", kind="picard", config_json="{}", status="processing")
        db.session.add_all([verify, failed, pending])
        db.session.flush()
        db.session.add_all([
            CaseReportRecord(run_id=verify.id, criterion="projector_identities", verdict="pass",
                             measured_json=json.dumps({"leray_idempotence": 1e-16})),
            CaseReportRecord(run_id=failed.id, criterion="timestep_run", verdict="fail",
                             measured_json="{}", provenance="time stepping"),
        ])
        db.session.commit()
        return {"verify": verify.id, "failed": failed.id, "pending": pending.id}


def test_lists_runs(client, registry):
    rv = client.get('/api/runs')
    assert rv.status_code == 200
    data = rv.get_json()
    assert data['pagination']['total_runs'] == 3
    by_id = {run['run_id']: run for run in data['runs']}
    assert by_id[registry['verify']]['passed'] == 1
    assert by_id[registry['failed']]['reports'] == 1
    assert by_id[registry['failed']]['passed'] == 0
    assert by_id[registry['pending']]['reports'] == 0


def test_pagination(client, registry):
    data = client.get('/api/runs?per_page=2&page=2').get_json()
    assert len(data['runs']) == 1
    assert data['pagination']['total_pages'] == 2
    assert data['pagination']['has_prev']
    assert not data['pagination']['has_next']


def test_status_filter(client, registry):
    data = client.get('/api/runs?status=failed').get_json()
    assert [run['experiment_id'] for run in data['runs']] == ['blow']


def test_run_details(client, registry):
    data = client.get(f"/api/runs/{registry['verify']}").get_json()
    assert data['suite'] == 'projectors'
    assert data['config'] == {'dim': 2}
    assert data['reports'][0]['measured'] == {'leray_idempotence': 1e-16}


def test_missing_run(client, registry):
    assert client.get('/api/runs/999').status_code == 404


def test_run_report(client, registry):
    rv = client.get(f"/api/runs/{registry['verify']}/report")
    assert rv.status_code == 200
    assert rv.get_json()[0]['verdict'] == 'pass'


def test_run_without_report_file(client, registry):
    rv = client.get(f"/api/runs/{registry['failed']}/report")
    assert rv.status_code == 404
    assert 'No report' in rv.get_json()['error']


def test_stats(client, registry):
    data = client.get('/api/stats').get_json()
    assert data['runs'] == {'total': 3, 'completed': 1, 'failed': 1, 'processing': 1}
    assert data['reports']['total'] == 2
    assert data['verdicts'] == {'pass': 1, 'fail': 1}
    assert data['suites'] == {'projectors': 1}
