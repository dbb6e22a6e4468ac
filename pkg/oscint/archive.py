"""
Optional MongoDB archive of run reports.

Nothing in the computations depends on it; the CLI writes to it only when
``--mongo-uri`` is given.
"""

from contextlib import contextmanager
from typing import Iterator, List, Optional, Union

from pymongo import ASCENDING, DESCENDING, MongoClient
from pymongo.collection import Collection
from pymongo.database import Database
from pymongo.errors import PyMongoError

from .report import ReportError, RunReport
from .utils import *

__all__ = ['ReportArchive', 'DEFAULT_DATABASE', 'DEFAULT_COLLECTION']

DEFAULT_DATABASE = 'oscint'
DEFAULT_COLLECTION = 'run_reports'


class ReportArchive:
    """Reports stored one per document, indexed on (subcommand, config.seed)."""

    indexes = [[('subcommand', ASCENDING), ('config.seed', ASCENDING)]]

    def __init__(self, db: Database, collection: str = DEFAULT_COLLECTION):
        self._db = db
        self._collection = None
        self.set_collection(collection)

    @classmethod
    def connect(cls, uri: str, database: str = DEFAULT_DATABASE, timeout_ms: int = 2000) -> 'ReportArchive':
        client = MongoClient(uri, serverSelectionTimeoutMS=timeout_ms)
        return cls(client.get_database(database))

    def get_db(self) -> Database:
        return self._db

    def get_collection(self) -> Collection:
        return self._collection

    def set_collection(self, collection: Union[str, Collection]) -> None:
        if isinstance(collection, Collection):
            self._collection = collection
        elif isinstance(collection, str):
            self._collection = self._db.get_collection(collection)
        else:
            raise ValueError(
                'expect a string or a {!r}, not type {!r}'.format(Collection, type(collection))
            )
        self._build_indexes()

    @contextmanager
    def switch_collection(self, collection: Union[str, Collection]) -> Iterator['ReportArchive']:
        old = self._collection
        self.set_collection(collection)
        try:
            yield self
        finally:
            self._collection = old

    def _build_indexes(self) -> None:
        for key in self.indexes:
            self._collection.create_index(key)

    def save(self, report: RunReport):
        """Insert the report and return its document id."""
        try:
            result = self._collection.insert_one(dict(report.to_dict()))
        except PyMongoError as e:
            raise ReportError('cannot archive the report: {}'.format(e)) from None
        info('archived {} report as {}'.format(report.subcommand, result.inserted_id))
        return result.inserted_id

    def find(self, subcommand: Optional[str] = None, seed: Optional[int] = None) -> List[RunReport]:
        query = {}
        if subcommand is not None:
            query['subcommand'] = subcommand
        if seed is not None:
            query['config.seed'] = seed
        return [self._to_report(doc) for doc in self._collection.find(query).sort('_id', ASCENDING)]

    def latest(self, subcommand: str) -> Optional[RunReport]:
        doc = self._collection.find_one({'subcommand': subcommand}, sort=[('_id', DESCENDING)])
        return None if doc is None else self._to_report(doc)

    def count(self) -> int:
        return self._collection.count_documents({})

    @staticmethod
    def _to_report(doc) -> RunReport:
        doc = dict(doc)
        doc.pop('_id', None)
        return RunReport(**doc)
