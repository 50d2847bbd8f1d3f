from services.spectral_core import FFT_WORKERS


def test_index(client):
    rv = client.get('/')
    assert rv.status_code == 200
    assert rv.get_json()['service'] == 'lans-alpha-lab'


def test_system_status(client):
    rv = client.get('/system/status')
    assert rv.status_code == 200
    data = rv.get_json()
    assert data['status'] == 'ok'
    assert data['fft_workers'] == FFT_WORKERS
    assert data['registered_runs'] == 0
    assert set(data['versions']) == {'lans-alpha-lab', 'numpy', 'scipy', 'pydantic'}
