from fractions import Fraction
from typing import Any, List, Optional

import numpy as np
import pytest

from oscint.fields import *
from oscint.model import BaseRecord, EmbeddedRecord, json_default


class TestBaseField:
    def test_str(self):
        class MM(BaseRecord):
            f: str

        obj = MM(f='x^2*y')
        assert isinstance(obj.f, str)

        with pytest.raises(ValidationError):
            MM(f=1)

    def test_str_min_length(self):
        class MM(BaseRecord):
            f = StringField(min_length=3)

        MM(f='abc')
        with pytest.raises(ValidationError) as err:
            MM(f='ab')
        assert 'less than' in err.value.msg

    def test_choice(self):
        class MM(BaseRecord):
            f = ChoiceField(['indicator', 'bump'])

        MM(f='bump')
        with pytest.raises(ValidationError) as err:
            MM(f='gauss')
        assert 'accepted values' in err.value.msg

    def test_int(self):
        class MM(BaseRecord):
            f: int

        obj = MM(f=256)
        assert isinstance(obj.f, int)

        with pytest.raises(ValidationError):
            MM(f='a')

    def test_int_max_value(self):
        class MM(BaseRecord):
            f = IntField(max_value=1 << 14)

        MM(f=1 << 14)
        with pytest.raises(ValidationError) as err:
            MM(f=(1 << 14) + 1)
        assert 'greater than' in err.value.msg

    def test_float_accepts_int(self):
        class MM(BaseRecord):
            f: float

        obj = MM(f=3)
        assert isinstance(obj.f, float)
        assert obj.f == 3.0

        with pytest.raises(ValidationError):
            MM(f='a')

    def test_float_min_value(self):
        class MM(BaseRecord):
            f = FloatField(min_value=0.0)

        MM(f=0.0)
        with pytest.raises(ValidationError) as err:
            MM(f=-1e-9)
        assert 'less than' in err.value.msg

    def test_fraction(self):
        class MM(BaseRecord):
            f: Fraction

        assert MM(f='3/2').f == Fraction(3, 2)
        assert MM(f=0.25).f == Fraction(1, 4)
        assert MM(f=7).f == Fraction(7)

        with pytest.raises(ValidationError) as err:
            MM(f='three halves')
        assert 'rational' in err.value.msg

    def test_bool_is_not_a_number(self):
        class MM(BaseRecord):
            f: bool
            g = NumberField()

        assert MM(f=True).f is True
        with pytest.raises(ValidationError):
            MM(f=1)
        with pytest.raises(ValidationError):
            MM(g=True)

    def test_dict(self):
        class MM(BaseRecord):
            f: dict

        obj = MM(f={'d': 0})
        assert isinstance(obj.f, dict)

        with pytest.raises(ValidationError):
            MM(f='abc')

    def test_list(self):
        class MM(BaseRecord):
            f: list

        obj = MM(f=[1, 'a'])
        assert isinstance(obj.f, list)

        with pytest.raises(ValidationError):
            MM(f='abc')

    def test_optional(self):
        class MM(BaseRecord):
            f: Optional[float]

        assert MM(f=None).f is None
        assert MM().get('f') is None


def test_any_field():
    class MainRecord(BaseRecord):
        f: Any

    MainRecord(f=1)
    MainRecord(f={})
    MainRecord(f=[1, 2, 3])


class TestEmbeddedField:
    def test_attr_proxy(self):
        class Inner(EmbeddedRecord):
            f: str

        class Middle(EmbeddedRecord):
            f1: str
            f2: Inner

        class Outer(BaseRecord):
            f1: Middle

        obj = Outer(f1={'f1': 'hello', 'f2': {'f': 'hello again'}})

        assert isinstance(obj.f1, Middle)
        assert obj.f1.f1 == 'hello'
        assert isinstance(obj.f1.f2, Inner)
        assert obj.f1.f2.f == 'hello again'

        with pytest.raises(AttributeError):
            _ = obj.f2
        with pytest.raises(AttributeError):
            _ = obj.f1.f3

    def test_feed_with_record_obj(self):
        class Sub(EmbeddedRecord):
            f1: str

        class Main(BaseRecord):
            f1: Sub

        obj = Main(f1=Sub(f1='hello'))
        assert obj.f1.f1 == 'hello'
        obj.f1 = Sub(f1='hi')
        assert obj.f1.f1 == 'hi'

    def test_feed_with_record_list(self):
        class Sub(EmbeddedRecord):
            f1: str

        class Main(BaseRecord):
            f1: List[Sub]

        obj = Main(f1=[Sub(f1='a'), Sub(f1='b'), {'f1': 'c'}])
        assert isinstance(obj.f1[2], Sub)
        assert obj.f1[1].f1 == 'b'

    def test_pass_in_wrong_type(self):
        with pytest.raises(TypeError) as err:

            class Foo:
                pass

            class FooRecord(BaseRecord):
                f = EmbeddedField(Foo)

        assert 'EmbeddedRecord' in err.value.args[0]


class TestArrayField:
    def test_basic_field(self):
        class Main(BaseRecord):
            f1: List[int]

        assert Main(f1=[1, 2, 3]).f1[2] == 3

        with pytest.raises(ValidationError):
            Main(f1='abc')
        with pytest.raises(ValidationError):
            Main(f1=[1, 'a'])

    def test_nested_basic_field(self):
        class Main(BaseRecord):
            f1: List[List[int]]

        obj = Main(f1=[[1, 1], [2, 0]])
        assert obj.f1[1][0] == 2

    def test_fractions_from_strings(self):
        class Main(BaseRecord):
            window: List[Fraction]

        obj = Main(window=['0', '1/8', 0, 0.125])
        assert obj.window == [0, Fraction(1, 8), 0, Fraction(1, 8)]

    def test_pass_in_wrong_type(self):
        with pytest.raises(TypeError) as err:

            class Foo:
                pass

            class FooRecord(BaseRecord):
                f = ArrayField(Foo)

        assert 'EmbeddedRecord' in err.value.args[0]


def test_invalid_field_type():
    class Foo:
        pass

    with pytest.raises(TypeError) as err:

        class Main(BaseRecord):
            x: Foo

    assert 'cannot convert' in err.value.args[0]


class TestDefaults:
    def test_field_in_record(self):
        class Main(BaseRecord):
            f1: int = 42
            f2: List[float] = [1, 2]
            f3: dict = {'a': 1}

        obj = Main()
        assert obj.f1 == 42
        assert obj.f2 == [1.0, 2.0]
        assert obj.f3 == {'a': 1}

    def test_field_in_embedded_record(self):
        class Sub(EmbeddedRecord):
            f1: int = 13
            f2: int

        class Main(BaseRecord):
            f1: List[Sub]

        assert Main(f1=[{'f2': 31}]).f1[0].f1 == 13


class TestMeta:
    def test_field_exist_in_meta(self):
        with pytest.raises(ValueError) as err:

            class Main(BaseRecord):
                f: int

                class Meta:
                    required = ['f1']

        assert 'not defined' in err.value.args[0]

    def test_required(self):
        class Main(BaseRecord):
            f: int

            class Meta:
                required = ['f']

        with pytest.raises(ValidationError) as err:
            Main()
        assert 'missing' in err.value.msg

    def test_converters_and_validators(self):
        class Main(BaseRecord):
            phase: str

            class Meta:
                converters = {'phase': lambda s: s.replace('**', '^')}
                validators = {'phase': lambda s: 'z' not in s}

        assert Main(phase='x**2').phase == 'x^2'
        with pytest.raises(ValidationError) as err:
            Main(phase='z')
        assert 'validator' in err.value.msg

    def test_forbid_extra_data(self):
        class Loose(BaseRecord):
            f: int

        class Strict(BaseRecord):
            forbid_extra_data = True
            f: int

        assert Loose(f=1, g=2).get('g') == 2
        with pytest.raises(ValidationError) as err:
            Strict(f=1, g=2)
        assert "'g'" in err.value.msg


class TestRecord:
    class Point(BaseRecord):
        x: Fraction
        y: Fraction
        tags: List[str] = []

    def test_json_round_trip(self):
        p = self.Point(x='1/3', y=2, tags=['a'])
        text = p.to_json()
        assert '"1/3"' in text
        assert self.Point.from_json(text) == p

    def test_replace(self):
        p = self.Point(x=1, y=2)
        q = p.replace(y='5/2')
        assert q.y == Fraction(5, 2)
        assert p.y == 2
        with pytest.raises(ValidationError):
            p.replace(x='nope')

    def test_set_validates(self):
        p = self.Point(x=1, y=2)
        p.x = '1/2'
        assert p.x == Fraction(1, 2)
        with pytest.raises(ValidationError):
            p.x = 'half'

    def test_equality_ignores_sequence_kind(self):
        assert self.Point(x=1, y=1, tags=('a',)) == self.Point(x=1, y=1, tags=['a'])
        assert self.Point(x=1, y=1) != self.Point(x=1, y=2)

    def test_iter_and_get(self):
        p = self.Point(x=1, y=2)
        assert list(p) == ['x', 'y', 'tags']
        assert p.get('missing', 0) == 0


def test_json_default():
    assert json_default(Fraction(-1, 6)) == '-1/6'
    assert json_default(np.int64(3)) == 3
    assert json_default(np.float32(0.5)) == 0.5
    assert json_default(np.arange(3)) == [0, 1, 2]
    with pytest.raises(TypeError):
        json_default(object())


if __name__ == '__main__':
    pytest.main()
