import pytest
from pymongo import MongoClient
from pymongo.errors import PyMongoError

from oscint.poly import parse_poly


@pytest.fixture
def db():
    client = MongoClient(serverSelectionTimeoutMS=500)
    try:
        client.admin.command('ping')
    except PyMongoError:
        client.close()
        pytest.skip('no MongoDB server answers on localhost')
    db = client.get_database('oscint-test')
    yield db
    client.drop_database('oscint-test')
    client.close()


@pytest.fixture
def cusp():
    """H = y^2 - x^3"""
    return parse_poly('y^2 - x^3')


@pytest.fixture
def nondegenerate_phase():
    return parse_poly('x^2*y - x*y^2')
